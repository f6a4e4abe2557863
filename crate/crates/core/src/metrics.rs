//! Covertness and reliability metrics under bounded noise uncertainty.
//!
//! The observer noise power is log-uniform on `[sigma0^2 / rho, rho * sigma0^2]`
//! with density `1 / (2 ln(rho) x)`. From its CDF the module derives the
//! warden's detection-error sum `xi(tau)` for a threshold test on received
//! power, its minimum `xi*` in closed form, and the receiver outage
//! probability for fixed-rate transmission. A seeded sampler of the noise
//! distribution backs the Monte Carlo test oracles.

use crate::rng_util::uniform01;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Absolute/relative tolerance for branch comparisons on power quantities.
pub const POWER_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("nominal noise power sigma0_sq must be positive and finite, got {0}")]
    InvalidNoisePower(f64),
    #[error("noise uncertainty rho must be finite and greater than 1, got {0} (linear)")]
    InvalidUncertainty(f64),
    #[error("transmit power must be non-negative and finite, got {0}")]
    InvalidTransmitPower(f64),
    #[error("channel gain must be non-negative and finite, got {0}")]
    InvalidGain(f64),
    #[error("rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("sample count must be at least 1")]
    EmptySample,
}

/// Bounded log-uniform noise-power model. `rho` is stored linear; the dB
/// value used by configuration files is kept for exact serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    sigma0_sq: f64,
    rho: f64,
    rho_db: f64,
}

impl NoiseModel {
    pub fn new(sigma0_sq: f64, rho: f64) -> Result<Self, MetricsError> {
        if !(sigma0_sq.is_finite() && sigma0_sq > 0.0) {
            return Err(MetricsError::InvalidNoisePower(sigma0_sq));
        }
        if !(rho.is_finite() && rho > 1.0) {
            return Err(MetricsError::InvalidUncertainty(rho));
        }
        Ok(Self {
            sigma0_sq,
            rho,
            rho_db: 10.0 * rho.log10(),
        })
    }

    /// `rho = 10^(dB / 10)`; requires a strictly positive dB value.
    pub fn from_db(sigma0_sq: f64, rho_db: f64) -> Result<Self, MetricsError> {
        if !(rho_db.is_finite() && rho_db > 0.0) {
            return Err(MetricsError::InvalidUncertainty(rho_db));
        }
        let mut model = Self::new(sigma0_sq, 10f64.powf(rho_db / 10.0))?;
        model.rho_db = rho_db;
        Ok(model)
    }

    pub fn sigma0_sq(&self) -> f64 {
        self.sigma0_sq
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn rho_db(&self) -> f64 {
        self.rho_db
    }

    /// Support `[sigma0^2 / rho, rho * sigma0^2]` of the noise power.
    pub fn support(&self) -> (f64, f64) {
        (self.sigma0_sq / self.rho, self.sigma0_sq * self.rho)
    }

    /// CDF of the noise power, clamped outside the support.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            0.0
        } else if x >= hi {
            1.0
        } else {
            (x * self.rho / self.sigma0_sq).ln() / (2.0 * self.rho.ln())
        }
    }

    /// Covertness-enabling power gap `kappa0 = (rho - 1/rho) * sigma0^2`.
    /// Received power shifts below this cannot be told apart from noise
    /// with certainty.
    pub fn kappa0(&self) -> f64 {
        (self.rho - 1.0 / self.rho) * self.sigma0_sq
    }
}

/// Transmit power and effective channel gains of one configuration. Under
/// maximal ratio transmission toward the receiver, `gain_b = N` and
/// `gain_w = f0 / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub p_a: f64,
    pub gain_b: f64,
    pub gain_w: f64,
    pub rate: f64,
}

impl LinkBudget {
    pub fn new(p_a: f64, gain_b: f64, gain_w: f64, rate: f64) -> Result<Self, MetricsError> {
        if !(p_a.is_finite() && p_a >= 0.0) {
            return Err(MetricsError::InvalidTransmitPower(p_a));
        }
        for g in [gain_b, gain_w] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(MetricsError::InvalidGain(g));
            }
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(MetricsError::InvalidRate(rate));
        }
        Ok(Self {
            p_a,
            gain_b,
            gain_w,
            rate,
        })
    }

    /// Budget for maximal ratio transmission with `n` antennas and effective
    /// warden gain `f0`.
    pub fn mrt(n: usize, f0: f64, p_a: f64, rate: f64) -> Result<Self, MetricsError> {
        let n = n as f64;
        Self::new(p_a, n, f0 / n, rate)
    }

    /// Rate threshold `beta = 2^rate - 1`, always recomputed.
    pub fn beta(&self) -> f64 {
        beta(self.rate)
    }
}

/// `beta = 2^rate - 1`.
pub fn beta(rate: f64) -> f64 {
    rate.exp2() - 1.0
}

/// Outcome of the warden's optimal threshold choice for one received-power
/// shift `kappa1 = P_a * gain_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovertnessReport {
    /// Minimum detection-error sum over thresholds, in [0, 1].
    pub xi_star: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    /// A minimizing threshold; in the covert regime the unique one.
    pub optimal_tau: f64,
    /// True when `kappa1 < kappa0`, i.e. detection cannot be error-free.
    pub covert_feasible: bool,
}

/// Detection-error sum `xi(tau) = Pr(sigma_w^2 > tau) + Pr(sigma_w^2 < tau - kappa1)`
/// for a power threshold test. Valid in both the `kappa1 < kappa0` and
/// `kappa1 >= kappa0` regimes.
pub fn xi_of_tau(tau: f64, kappa1: f64, noise: &NoiseModel) -> f64 {
    debug_assert!(kappa1 >= 0.0);
    (1.0 - noise.cdf(tau) + noise.cdf(tau - kappa1)).clamp(0.0, 1.0)
}

/// Closed-form minimum of `xi(tau)` for a given power shift `kappa1`.
pub fn xi_star_from_kappa1(kappa1: f64, noise: &NoiseModel) -> CovertnessReport {
    debug_assert!(kappa1 >= 0.0);
    let kappa0 = noise.kappa0();
    let covert_feasible = kappa1 < kappa0;
    let xi_star = if covert_feasible {
        let rho = noise.rho();
        (1.0 - (1.0 + rho * kappa1 / noise.sigma0_sq()).ln() / (2.0 * rho.ln())).clamp(0.0, 1.0)
    } else {
        0.0
    };
    // tau at the lower support edge plus the shift minimizes xi in both
    // regimes; in the covert one it is the unique kink of the V shape.
    let optimal_tau = noise.sigma0_sq() / noise.rho() + kappa1;
    CovertnessReport {
        xi_star,
        kappa0,
        kappa1,
        optimal_tau,
        covert_feasible,
    }
}

/// Minimum detection-error sum for a link budget: `kappa1 = P_a * gain_w`.
pub fn xi_star(budget: &LinkBudget, noise: &NoiseModel) -> CovertnessReport {
    xi_star_from_kappa1(budget.p_a * budget.gain_w, noise)
}

/// Outage probability of fixed-rate transmission toward the receiver, i.e.
/// `Pr(log2(1 + P_a gain_b / sigma_b^2) <= rate)` under the noise model.
/// Zero from `P_a gain_b >= rho sigma0^2 beta` (ultra reliability), one below
/// `sigma0^2 beta / rho`, log-linear in between.
pub fn outage_probability(budget: &LinkBudget, noise: &NoiseModel) -> f64 {
    let g = budget.p_a * budget.gain_b;
    let beta = budget.beta();
    let lo = noise.sigma0_sq() * beta / noise.rho();
    let hi = noise.rho() * noise.sigma0_sq() * beta;
    if g <= lo + POWER_TOL.max(POWER_TOL * lo) {
        1.0
    } else if g >= hi - POWER_TOL.max(POWER_TOL * hi) {
        0.0
    } else {
        ((hi / g).ln() / (2.0 * noise.rho().ln())).clamp(0.0, 1.0)
    }
}

/// Seeded i.i.d. draws of the noise power: `sigma^2 = sigma0^2 * rho^(2U - 1)`
/// with `U` uniform on [0, 1). Deterministic for a fixed seed.
pub fn sample_noise_power(
    noise: &NoiseModel,
    seed: u64,
    count: usize,
) -> Result<Vec<f64>, MetricsError> {
    if count == 0 {
        return Err(MetricsError::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let u = uniform01(&mut rng);
            noise.sigma0_sq() * noise.rho().powf(2.0 * u - 1.0)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn noise(sigma0_sq: f64, rho: f64) -> NoiseModel {
        NoiseModel::new(sigma0_sq, rho).unwrap()
    }

    /// Independent oracle: minimize xi(tau) over a dense threshold grid.
    fn grid_min_xi(kappa1: f64, n: &NoiseModel, points: usize) -> (f64, f64) {
        let (lo, hi) = n.support();
        let hi = hi + kappa1;
        let step = (hi - lo) / (points as f64 - 1.0);
        let mut best = (f64::INFINITY, lo);
        for i in 0..points {
            let tau = lo + i as f64 * step;
            let xi = xi_of_tau(tau, kappa1, n);
            if xi < best.0 {
                best = (xi, tau);
            }
        }
        best
    }

    #[test]
    fn xi_is_one_below_support() {
        let n = noise(1.0, 2.0);
        assert_eq!(xi_of_tau(0.5, 1.0, &n), 1.0);
        assert_eq!(xi_of_tau(0.49, 1.0, &n), 1.0);
    }

    #[test]
    fn xi_is_one_above_shifted_support() {
        let n = noise(1.0, 2.0);
        assert_eq!(xi_of_tau(3.0, 1.0, &n), 1.0);
        assert_eq!(xi_of_tau(3.7, 1.0, &n), 1.0);
    }

    #[test]
    fn xi_minimum_value_and_location() {
        // For rho = 2, sigma0^2 = 1, kappa1 = 1 the minimizer is
        // tau = 1/rho + kappa1 = 1.5 with value 1 - ln(3) / (2 ln 2).
        let n = noise(1.0, 2.0);
        let expected = 1.0 - 3f64.ln() / (2.0 * 2f64.ln());
        assert!((xi_of_tau(1.5, 1.0, &n) - expected).abs() < 1e-12);
        assert!((expected - 0.2075).abs() < 1e-4);
        let (min_xi, min_tau) = grid_min_xi(1.0, &n, 200_001);
        assert!((min_xi - expected).abs() < 1e-4);
        assert!((min_tau - 1.5).abs() < 1e-4);
    }

    #[test]
    fn xi_star_zero_power_gives_blind_warden() {
        let report = xi_star_from_kappa1(0.0, &noise(1.0, 2.0));
        assert_eq!(report.xi_star, 1.0);
        assert!(report.covert_feasible);
    }

    #[test]
    fn xi_star_branches_meet_at_kappa0() {
        let n = noise(1.0, 2.0);
        let k0 = n.kappa0();
        assert_eq!(xi_star_from_kappa1(k0, &n).xi_star, 0.0);
        // closed-form limit from the covert side is exactly 0 as well
        let rho = n.rho();
        let limit = 1.0 - (1.0 + rho * k0).ln() / (2.0 * rho.ln());
        assert!(limit.abs() < 1e-12);
        let just_below = xi_star_from_kappa1(k0 * (1.0 - 1e-9), &n);
        assert!(just_below.xi_star >= 0.0 && just_below.xi_star < 1e-8);
    }

    #[test]
    fn xi_star_matches_grid_oracle() {
        let n = noise(1.0, 2.0);
        let report = xi_star_from_kappa1(1.0, &n);
        let (oracle, _) = grid_min_xi(1.0, &n, 100_000);
        assert!((report.xi_star - oracle).abs() <= 1e-3);
        assert!((report.xi_star - 0.20752).abs() < 1e-4);
    }

    #[test]
    fn kappa0_values() {
        assert!((noise(1.0, 2.0).kappa0() - 1.5).abs() < 1e-12);
        assert!(noise(1.0, 1.0 + 1e-9).kappa0() < 1e-8);
        let base = noise(1.0, 3.0).kappa0();
        assert!((noise(2.5, 3.0).kappa0() - 2.5 * base).abs() < 1e-12);
    }

    #[test]
    fn outage_branches() {
        let n = noise(1.0, 2.0);
        // beta = 1 at rate 1; ultra-reliable from g >= 2, certain outage below 0.5
        let reliable = LinkBudget::new(2.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(outage_probability(&reliable, &n), 0.0);
        let dead = LinkBudget::new(0.5, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(outage_probability(&dead, &n), 1.0);
        let mid = LinkBudget::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((outage_probability(&mid, &n) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn outage_continuous_at_branch_edges() {
        let n = noise(1.3, 3.7);
        let beta = beta(0.8);
        let lo = n.sigma0_sq() * beta / n.rho();
        let hi = n.rho() * n.sigma0_sq() * beta;
        let middle = |g: f64| (hi / g).ln() / (2.0 * n.rho().ln());
        assert!((middle(lo) - 1.0).abs() < 1e-12);
        assert!(middle(hi).abs() < 1e-12);
    }

    #[test]
    fn outage_matches_monte_carlo() {
        // empirical Pr(log2(1 + g / sigma_b^2) <= rate) over seeded samples
        let n = noise(1.0, 2.0);
        for (g, rate, seed) in [(1.0, 1.0, 7u64), (1.4, 1.0, 8), (0.9, 0.7, 9)] {
            let budget = LinkBudget::new(g, 1.0, 0.0, rate).unwrap();
            let p = outage_probability(&budget, &n);
            let samples = sample_noise_power(&n, seed, 1_000_000).unwrap();
            let hits = samples
                .iter()
                .filter(|&&s| (1.0 + g / s).log2() <= rate)
                .count();
            let emp = hits as f64 / samples.len() as f64;
            let se = (p * (1.0 - p) / samples.len() as f64).sqrt().max(1e-6);
            assert!(
                (emp - p).abs() <= 3.0 * se + 1e-4,
                "g={g} rate={rate}: analytic {p} vs empirical {emp}"
            );
        }
    }

    #[test]
    fn sampler_support_and_determinism() {
        let n = noise(0.7, 3.0);
        let (lo, hi) = n.support();
        let a = sample_noise_power(&n, 42, 10_000).unwrap();
        assert!(a.iter().all(|&s| s >= lo && s <= hi));
        let b = sample_noise_power(&n, 42, 10_000).unwrap();
        assert_eq!(a, b);
        let c = sample_noise_power(&n, 43, 10_000).unwrap();
        assert_ne!(a, c);
        assert_eq!(
            sample_noise_power(&n, 1, 0),
            Err(MetricsError::EmptySample)
        );
    }

    #[test]
    fn sampler_median_at_nominal_power() {
        let n = noise(1.0, 4.0);
        let samples = sample_noise_power(&n, 5, 200_000).unwrap();
        let below = samples.iter().filter(|&&s| s <= 1.0).count() as f64;
        let frac = below / samples.len() as f64;
        // CDF at sigma0^2 is exactly 1/2
        assert!((frac - 0.5).abs() < 3.0 * 0.5 / (samples.len() as f64).sqrt() + 1e-3);
        let narrow = noise(1.0, 1.0 + 1e-6);
        let tight = sample_noise_power(&narrow, 6, 1000).unwrap();
        assert!(tight.iter().all(|&s| (s - 1.0).abs() < 1e-5));
    }

    #[test]
    fn pdf_integrates_to_one() {
        // Simpson quadrature of 1 / (2 ln(rho) x) over the support
        for (s0, rho) in [(1.0, 2.0), (0.3, 7.5), (4.0, 1.2)] {
            let n = noise(s0, rho);
            let (lo, hi) = n.support();
            let f = |x: f64| 1.0 / (2.0 * rho.ln() * x);
            let panels = 20_000;
            let h = (hi - lo) / panels as f64;
            let mut acc = f(lo) + f(hi);
            for i in 1..panels {
                let w = if i % 2 == 0 { 2.0 } else { 4.0 };
                acc += w * f(lo + i as f64 * h);
            }
            let integral = acc * h / 3.0;
            assert!((integral - 1.0).abs() < 1e-9, "rho={rho}: {integral}");
        }
    }

    proptest! {
        #[test]
        fn grid_oracle_agrees_in_both_regimes(
            rho in 1.1f64..10.0,
            sigma0_sq in 0.1f64..10.0,
            kappa_frac in 0.0f64..2.0,
        ) {
            let n = noise(sigma0_sq, rho);
            let kappa1 = kappa_frac * n.kappa0();
            let report = xi_star_from_kappa1(kappa1, &n);
            let (oracle, oracle_tau) = grid_min_xi(kappa1, &n, 100_000);
            prop_assert!((report.xi_star - oracle).abs() <= 1e-3);
            if report.covert_feasible {
                let (lo, hi) = n.support();
                let step = (hi + kappa1 - lo) / 99_999.0;
                prop_assert!((oracle_tau - report.optimal_tau).abs() <= step * (1.0 + 1e-9));
            }
        }

        #[test]
        fn xi_star_monotone_in_kappa1(
            rho in 1.1f64..10.0,
            sigma0_sq in 0.1f64..10.0,
            a in 0.0f64..1.5,
            b in 0.0f64..1.5,
        ) {
            let n = noise(sigma0_sq, rho);
            let (lo, hi) = (a.min(b), a.max(b));
            let xi_lo = xi_star_from_kappa1(lo * n.kappa0(), &n).xi_star;
            let xi_hi = xi_star_from_kappa1(hi * n.kappa0(), &n).xi_star;
            prop_assert!(xi_hi <= xi_lo + 1e-12);
        }

        #[test]
        fn xi_weakly_unimodal_around_optimal_tau(
            rho in 1.2f64..8.0,
            kappa_frac in 0.05f64..0.95,
        ) {
            let n = noise(1.0, rho);
            let kappa1 = kappa_frac * n.kappa0();
            let tau_star = n.sigma0_sq() / n.rho() + kappa1;
            let (lo, hi) = n.support();
            let hi = hi + kappa1;
            let points = 2000;
            let step = (hi - lo) / points as f64;
            let mut prev = xi_of_tau(lo, kappa1, &n);
            let mut tau = lo + step;
            while tau <= hi {
                let cur = xi_of_tau(tau, kappa1, &n);
                if tau <= tau_star {
                    prop_assert!(cur <= prev + 1e-12);
                } else if tau - step >= tau_star {
                    prop_assert!(cur >= prev - 1e-12);
                }
                prev = cur;
                tau += step;
            }
        }

        #[test]
        fn outage_monotone_in_gain(
            rho in 1.1f64..10.0,
            g1 in 0.01f64..20.0,
            g2 in 0.01f64..20.0,
        ) {
            let n = noise(1.0, rho);
            let (lo, hi) = (g1.min(g2), g1.max(g2));
            let p_lo = outage_probability(&LinkBudget::new(lo, 1.0, 0.0, 1.0).unwrap(), &n);
            let p_hi = outage_probability(&LinkBudget::new(hi, 1.0, 0.0, 1.0).unwrap(), &n);
            prop_assert!(p_hi <= p_lo + 1e-12);
        }
    }
}
