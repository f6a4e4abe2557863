//! Seeded, platform-stable uniform draws used by the noise sampler and the
//! multi-start initializer.

use rand_chacha::rand_core::RngCore;

/// Uniform draw on [0, 1) with 53 bits of precision.
pub(crate) fn uniform01<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw on the closed interval [lo, hi]. Degenerate intervals
/// (lo == hi) return the single point.
pub(crate) fn uniform_in<R: RngCore>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + uniform01(rng) * (hi - lo)
}
