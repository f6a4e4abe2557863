//! Geometry of a linear movable-antenna (MA) array.
//!
//! Each of the `N` antennas slides inside its own box `[F_n, G_n]`; the boxes
//! tile the total movable range `[0, L]` with `L = L0 * (N - 1) * d_min` and
//! are separated by protection gaps of exactly `d_min`, so any per-box choice
//! of positions automatically respects the minimum adjacent spacing. A box can
//! optionally be quantized to an equally spaced position grid.
//!
//! Lengths are in the same unit as the wavelength (the default configuration
//! normalizes `lambda = 1`, `d_min = lambda / 2`); angles are radians.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::fmt;
use thiserror::Error;

/// Absolute tolerance for feasibility checks on positions.
pub const POSITION_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("antenna count must be at least 1")]
    InvalidAntennaCount,
    #[error("wavelength must be positive and finite, got {0}")]
    InvalidWavelength(f64),
    #[error("minimum spacing d_min must be positive and finite, got {0}")]
    InvalidMinSpacing(f64),
    #[error("movable scale factor l0 must be finite and at least 1, got {0}")]
    InvalidScaleFactor(f64),
    #[error("expected {expected} grid size entries, got {got}")]
    GridSizesLength { expected: usize, got: usize },
    #[error("grid size must be at least 1 point")]
    InvalidGridSize,
    #[error("antenna index {index} out of range for {count} antennas")]
    AntennaIndex { index: usize, count: usize },
    #[error("antenna {index} has a continuous movable range, not a finite grid")]
    ContinuousGrid { index: usize },
    #[error("expected {expected} positions, got {got}")]
    PositionCount { expected: usize, got: usize },
    #[error("position {index} is not finite")]
    NonFinitePosition { index: usize },
    #[error("positions {index} and {} closer than d_min", index + 1)]
    SpacingViolation { index: usize },
}

/// Number of selectable positions for one antenna: a finite grid over its box
/// or the whole continuous box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSize {
    Continuous,
    Points(usize),
}

impl fmt::Display for GridSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSize::Continuous => write!(f, "continuous"),
            GridSize::Points(k) => write!(f, "{k}"),
        }
    }
}

/// Sign convention for the phase coefficient `A` that enters the effective
/// gain toward the warden. `Difference` uses `cos(theta_b) - cos(theta_w)`,
/// which is what conjugating the receiver steering vector yields; `Sum` uses
/// `cos(theta_b) + cos(theta_w)` and is kept selectable so sweep results can
/// be compared under both readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleConvention {
    #[default]
    Difference,
    Sum,
}

impl fmt::Display for AngleConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleConvention::Difference => write!(f, "difference"),
            AngleConvention::Sum => write!(f, "sum"),
        }
    }
}

/// Static description of the array: antenna count, wavelength, minimum
/// spacing, movable scale factor and per-antenna grid resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ArraySpec {
    n_antennas: usize,
    wavelength: f64,
    d_min: f64,
    l0: f64,
    grid_sizes: Vec<GridSize>,
}

impl ArraySpec {
    pub fn new(
        n_antennas: usize,
        wavelength: f64,
        d_min: f64,
        l0: f64,
        grid_sizes: Vec<GridSize>,
    ) -> Result<Self, GeometryError> {
        if n_antennas == 0 {
            return Err(GeometryError::InvalidAntennaCount);
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(GeometryError::InvalidWavelength(wavelength));
        }
        if !(d_min.is_finite() && d_min > 0.0) {
            return Err(GeometryError::InvalidMinSpacing(d_min));
        }
        if !(l0.is_finite() && l0 >= 1.0) {
            return Err(GeometryError::InvalidScaleFactor(l0));
        }
        if grid_sizes.len() != n_antennas {
            return Err(GeometryError::GridSizesLength {
                expected: n_antennas,
                got: grid_sizes.len(),
            });
        }
        if grid_sizes.iter().any(|g| matches!(g, GridSize::Points(0))) {
            return Err(GeometryError::InvalidGridSize);
        }
        Ok(Self {
            n_antennas,
            wavelength,
            d_min,
            l0,
            grid_sizes,
        })
    }

    /// Same grid resolution for every antenna.
    pub fn with_uniform_grid(
        n_antennas: usize,
        wavelength: f64,
        d_min: f64,
        l0: f64,
        grid: GridSize,
    ) -> Result<Self, GeometryError> {
        Self::new(n_antennas, wavelength, d_min, l0, vec![grid; n_antennas])
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn grid_sizes(&self) -> &[GridSize] {
        &self.grid_sizes
    }

    /// Total movable range `L = L0 * (N - 1) * d_min`.
    pub fn total_range(&self) -> f64 {
        self.l0 * (self.n_antennas as f64 - 1.0) * self.d_min
    }

    /// Width of each per-antenna box.
    fn slot_width(&self) -> f64 {
        let n = self.n_antennas as f64;
        (self.total_range() - (n - 1.0) * self.d_min) / n
    }

    /// Movable box `[F_n, G_n]` of antenna `antenna` (0-based). Boxes are
    /// pairwise disjoint with gaps of exactly `d_min`; the first starts at 0
    /// and the last ends at `L`.
    pub fn bounds(&self, antenna: usize) -> Result<(f64, f64), GeometryError> {
        if antenna >= self.n_antennas {
            return Err(GeometryError::AntennaIndex {
                index: antenna,
                count: self.n_antennas,
            });
        }
        let slot = self.slot_width();
        let lower = antenna as f64 * (slot + self.d_min);
        Ok((lower, lower + slot))
    }

    /// Equally spaced, endpoint-inclusive position grid of one antenna.
    /// Degenerate boxes (`F_n == G_n`) collapse to a single point; otherwise
    /// the grid is strictly increasing. Errors when the antenna is continuous.
    pub fn grid(&self, antenna: usize) -> Result<Vec<f64>, GeometryError> {
        let (lower, upper) = self.bounds(antenna)?;
        let k = match self.grid_sizes[antenna] {
            GridSize::Continuous => {
                return Err(GeometryError::ContinuousGrid { index: antenna })
            }
            GridSize::Points(k) => k,
        };
        if k == 1 || upper <= lower {
            return Ok(vec![lower]);
        }
        let step = (upper - lower) / (k as f64 - 1.0);
        Ok((0..k)
            .map(|i| {
                if i == k - 1 {
                    upper
                } else {
                    lower + i as f64 * step
                }
            })
            .collect())
    }

    /// Conventional fixed-position array: `x_n = n * d_min` (0-based), the
    /// unique feasible layout when `l0 == 1`. Note that for `l0 > 1` this
    /// baseline lies outside the movable boxes of antennas 1..N-1.
    pub fn fpa_layout(&self) -> AntennaLayout {
        let positions: Vec<f64> = (0..self.n_antennas)
            .map(|i| i as f64 * self.d_min)
            .collect();
        AntennaLayout::new(self.clone(), positions)
            .expect("uniform d_min spacing is always a valid layout")
    }
}

/// Concrete antenna positions together with the array they belong to.
/// Construction enforces ordering and the minimum adjacent spacing; box and
/// grid membership are separate queries because the fixed-position baseline
/// deliberately sits outside the movable boxes when `l0 > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaLayout {
    positions: Vec<f64>,
    spec: ArraySpec,
}

impl AntennaLayout {
    pub fn new(spec: ArraySpec, positions: Vec<f64>) -> Result<Self, GeometryError> {
        if positions.len() != spec.n_antennas {
            return Err(GeometryError::PositionCount {
                expected: spec.n_antennas,
                got: positions.len(),
            });
        }
        for (i, x) in positions.iter().enumerate() {
            if !x.is_finite() {
                return Err(GeometryError::NonFinitePosition { index: i });
            }
        }
        let tol = POSITION_TOL * (1.0 + spec.d_min);
        for i in 0..positions.len().saturating_sub(1) {
            if positions[i + 1] - positions[i] < spec.d_min - tol {
                return Err(GeometryError::SpacingViolation { index: i });
            }
        }
        Ok(Self { positions, spec })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn spec(&self) -> &ArraySpec {
        &self.spec
    }

    pub fn n_antennas(&self) -> usize {
        self.positions.len()
    }

    /// True when every position lies inside its antenna's movable box.
    pub fn box_feasible(&self) -> bool {
        self.positions.iter().enumerate().all(|(i, &x)| {
            let (lo, hi) = self.spec.bounds(i).expect("index in range");
            let tol = POSITION_TOL * (1.0 + hi.abs());
            x >= lo - tol && x <= hi + tol
        })
    }

    /// True when every finitely gridded position coincides with a grid point.
    pub fn grid_feasible(&self) -> bool {
        self.positions.iter().enumerate().all(|(i, &x)| {
            match self.spec.grid_sizes[i] {
                GridSize::Continuous => true,
                GridSize::Points(_) => {
                    let grid = self.spec.grid(i).expect("finite grid");
                    let tol = POSITION_TOL * (1.0 + x.abs());
                    grid.iter().any(|&g| (g - x).abs() <= tol)
                }
            }
        })
    }
}

/// Unit-modulus line-of-sight channel vector for a steering angle.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
    pub angle: f64,
}

impl SteeringVector {
    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Channel vector entry `exp(j * (2 pi / lambda) * x_n * cos(theta))` for each
/// antenna position. `lambda` must be positive.
pub fn steering_vector(layout: &AntennaLayout, theta: f64, lambda: f64) -> SteeringVector {
    debug_assert!(lambda > 0.0);
    let coeff = TAU / lambda * theta.cos();
    SteeringVector {
        entries: layout
            .positions()
            .iter()
            .map(|&x| Complex64::from_polar(1.0, coeff * x))
            .collect(),
        angle: theta,
    }
}

/// Phase coefficient `A = (2 pi / lambda) * (cos(theta_b) -/+ cos(theta_w))`
/// under the selected convention.
pub fn phase_coefficient(
    theta_b: f64,
    theta_w: f64,
    lambda: f64,
    convention: AngleConvention,
) -> f64 {
    debug_assert!(lambda > 0.0);
    let combined = match convention {
        AngleConvention::Difference => theta_b.cos() - theta_w.cos(),
        AngleConvention::Sum => theta_b.cos() + theta_w.cos(),
    };
    TAU / lambda * combined
}

/// Squared array factor `|sum_n exp(j * a * x_n)|^2 = T1^2 + T2^2` with
/// `T1 = sum sin(a x_n)`, `T2 = sum cos(a x_n)`. Lies in `[0, N^2]`.
pub fn array_gain(positions: &[f64], phase_coeff: f64) -> f64 {
    let (t1, t2) = positions.iter().fold((0.0, 0.0), |(s, c), &x| {
        let (sin, cos) = (phase_coeff * x).sin_cos();
        (s + sin, c + cos)
    });
    t1 * t1 + t2 * t2
}

/// Effective gain toward the warden `f0 = |h_aw^H h_ab|^2` for a layout,
/// using the difference convention implied by conjugation of the receiver
/// channel. Equals `N^2` whenever `cos(theta_b) == cos(theta_w)`.
pub fn effective_gain_f0(layout: &AntennaLayout, theta_b: f64, theta_w: f64, lambda: f64) -> f64 {
    let a = phase_coefficient(theta_b, theta_w, lambda, AngleConvention::Difference);
    array_gain(layout.positions(), a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn spec(n: usize, l0: f64, grid: GridSize) -> ArraySpec {
        ArraySpec::with_uniform_grid(n, 1.0, 0.5, l0, grid).unwrap()
    }

    #[test]
    fn bounds_collapse_when_l0_is_one() {
        let s = spec(2, 1.0, GridSize::Continuous);
        assert_eq!(s.bounds(0).unwrap(), (0.0, 0.0));
        assert_eq!(s.bounds(1).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn bounds_single_antenna() {
        let s = spec(1, 7.0, GridSize::Continuous);
        assert_eq!(s.bounds(0).unwrap(), (0.0, 0.0));
        assert_eq!(s.total_range(), 0.0);
    }

    #[test]
    fn bounds_three_antennas_l0_ten() {
        let s = spec(3, 10.0, GridSize::Continuous);
        let expected = [(0.0, 3.0), (3.5, 6.5), (7.0, 10.0)];
        for (i, &(lo, hi)) in expected.iter().enumerate() {
            let (f, g) = s.bounds(i).unwrap();
            assert!((f - lo).abs() < 1e-12, "antenna {i} lower {f} != {lo}");
            assert!((g - hi).abs() < 1e-12, "antenna {i} upper {g} != {hi}");
        }
    }

    #[test]
    fn bounds_index_out_of_range() {
        let s = spec(3, 2.0, GridSize::Continuous);
        assert_eq!(
            s.bounds(3),
            Err(GeometryError::AntennaIndex { index: 3, count: 3 })
        );
    }

    #[test]
    fn grid_endpoints_only() {
        let s = spec(3, 10.0, GridSize::Points(2));
        assert_eq!(s.grid(0).unwrap(), vec![0.0, 3.0]);
    }

    #[test]
    fn grid_four_points_equally_spaced() {
        let s = spec(3, 10.0, GridSize::Points(4));
        assert_eq!(s.grid(0).unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn grid_offset_box() {
        let s = spec(3, 10.0, GridSize::Points(3));
        assert_eq!(s.grid(2).unwrap(), vec![7.0, 8.5, 10.0]);
    }

    #[test]
    fn grid_single_point_and_degenerate_box() {
        let s = spec(3, 10.0, GridSize::Points(1));
        assert_eq!(s.grid(1).unwrap(), vec![3.5]);
        // l0 = 1 collapses each box to a point regardless of k
        let s = spec(3, 1.0, GridSize::Points(8));
        assert_eq!(s.grid(1).unwrap(), vec![0.5]);
    }

    #[test]
    fn grid_continuous_is_an_error() {
        let s = spec(2, 2.0, GridSize::Continuous);
        assert_eq!(s.grid(0), Err(GeometryError::ContinuousGrid { index: 0 }));
    }

    #[test]
    fn steering_vector_zero_positions_is_all_ones() {
        let s = spec(1, 1.0, GridSize::Continuous);
        let layout = AntennaLayout::new(s, vec![0.0]).unwrap();
        let sv = steering_vector(&layout, 0.7, 1.0);
        assert!((sv.entries[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn steering_vector_broadside_ignores_positions() {
        let s = spec(3, 4.0, GridSize::Continuous);
        let layout = s.fpa_layout();
        let sv = steering_vector(&layout, FRAC_PI_2, 1.0);
        for e in &sv.entries {
            assert!((e - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn steering_vector_norm_is_antenna_count() {
        let s = spec(5, 3.0, GridSize::Continuous);
        let layout = s.fpa_layout();
        let sv = steering_vector(&layout, 1.1, 1.0);
        assert!((sv.norm_sqr() - 5.0).abs() < 1e-12);
        for e in &sv.entries {
            assert!((e.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gain_equal_angles_is_n_squared() {
        let s = spec(4, 6.0, GridSize::Continuous);
        let layout = AntennaLayout::new(s, vec![0.3, 4.0, 8.0, 12.0]).unwrap();
        let f0 = effective_gain_f0(&layout, 0.4, 0.4, 1.0);
        assert!((f0 - 16.0).abs() < 1e-9);
    }

    #[test]
    fn gain_single_antenna_is_one() {
        let s = spec(1, 1.0, GridSize::Continuous);
        let layout = AntennaLayout::new(s, vec![0.0]).unwrap();
        assert!((effective_gain_f0(&layout, 0.1, 2.3, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gain_two_antennas_cancel() {
        // cos(theta_b) - cos(theta_w) = 1 puts the two entries in antiphase
        let s = spec(2, 2.0, GridSize::Continuous);
        let layout = AntennaLayout::new(s, vec![0.0, 0.5]).unwrap();
        let f0 = effective_gain_f0(&layout, 0.0, FRAC_PI_2, 1.0);
        assert!(f0.abs() < 1e-12, "expected cancellation, got {f0}");
    }

    #[test]
    fn fpa_layout_uniform_spacing() {
        let s = spec(3, 10.0, GridSize::Continuous);
        assert_eq!(s.fpa_layout().positions(), &[0.0, 0.5, 1.0]);
        let s = spec(1, 1.0, GridSize::Continuous);
        assert_eq!(s.fpa_layout().positions(), &[0.0]);
    }

    // The fixed-position baseline coincides with the movable boxes only in
    // the degenerate l0 = 1 case; for l0 > 1 the boxes of antennas 1.. start
    // strictly above n * d_min, so the baseline is not box-feasible.
    #[test]
    fn fpa_layout_box_feasibility() {
        for n in 1..=8 {
            assert!(spec(n, 1.0, GridSize::Continuous).fpa_layout().box_feasible());
        }
        for n in 2..=8 {
            for l0 in [1.5, 2.0, 10.0] {
                assert!(
                    !spec(n, l0, GridSize::Continuous).fpa_layout().box_feasible(),
                    "n={n} l0={l0}"
                );
            }
        }
        // a single antenna is always at its (only) box
        assert!(spec(1, 5.0, GridSize::Continuous).fpa_layout().box_feasible());
    }

    #[test]
    fn layout_rejects_tight_spacing() {
        let s = spec(2, 2.0, GridSize::Continuous);
        assert_eq!(
            AntennaLayout::new(s, vec![0.0, 0.4]),
            Err(GeometryError::SpacingViolation { index: 0 })
        );
    }

    proptest! {
        #[test]
        fn boxes_tile_range_with_dmin_gaps(
            n in 1usize..9,
            l0 in 1.0f64..20.0,
            d_min in 0.05f64..3.0,
        ) {
            let s = ArraySpec::with_uniform_grid(n, 1.0, d_min, l0, GridSize::Continuous).unwrap();
            let tol = 1e-9 * (1.0 + s.total_range());
            let (f0, _) = s.bounds(0).unwrap();
            prop_assert!(f0.abs() <= tol);
            let (_, gn) = s.bounds(n - 1).unwrap();
            prop_assert!((gn - s.total_range()).abs() <= tol);
            let width = (s.total_range() - (n as f64 - 1.0) * d_min) / n as f64;
            for i in 0..n {
                let (lo, hi) = s.bounds(i).unwrap();
                prop_assert!((hi - lo - width).abs() <= tol);
                if i + 1 < n {
                    let (next_lo, _) = s.bounds(i + 1).unwrap();
                    prop_assert!((next_lo - hi - d_min).abs() <= tol);
                }
            }
        }

        #[test]
        fn per_box_selection_keeps_min_spacing(
            n in 2usize..7,
            l0 in 1.0f64..15.0,
            fractions in proptest::collection::vec(0.0f64..=1.0, 2..7),
        ) {
            prop_assume!(fractions.len() >= n);
            let s = ArraySpec::with_uniform_grid(n, 1.0, 0.5, l0, GridSize::Continuous).unwrap();
            let positions: Vec<f64> = (0..n)
                .map(|i| {
                    let (lo, hi) = s.bounds(i).unwrap();
                    lo + fractions[i] * (hi - lo)
                })
                .collect();
            let layout = AntennaLayout::new(s, positions).unwrap();
            prop_assert!(layout.box_feasible());
            for w in layout.positions().windows(2) {
                prop_assert!(w[1] - w[0] >= 0.5 - 1e-9);
            }
        }

        #[test]
        fn grids_are_sorted_with_constant_step(
            n in 1usize..6,
            l0 in 1.01f64..12.0,
            k in 2usize..40,
        ) {
            let s = ArraySpec::with_uniform_grid(n, 1.0, 0.5, l0, GridSize::Points(k)).unwrap();
            for i in 0..n {
                let grid = s.grid(i).unwrap();
                let (lo, hi) = s.bounds(i).unwrap();
                if hi <= lo {
                    // degenerate box (n == 1 or l0 == 1) collapses the grid
                    prop_assert_eq!(grid, vec![lo]);
                    continue;
                }
                prop_assert_eq!(grid.len(), k);
                prop_assert_eq!(grid[0], lo);
                prop_assert_eq!(grid[k - 1], hi);
                let step = (hi - lo) / (k as f64 - 1.0);
                for w in grid.windows(2) {
                    prop_assert!((w[1] - w[0] - step).abs() <= 1e-9 * (1.0 + hi.abs()));
                }
            }
        }

        #[test]
        fn gain_bounded_and_translation_invariant(
            n in 1usize..8,
            a in -30.0f64..30.0,
            shift in -5.0f64..5.0,
            fractions in proptest::collection::vec(0.0f64..=1.0, 1..8),
        ) {
            prop_assume!(fractions.len() >= n);
            let s = ArraySpec::with_uniform_grid(n, 1.0, 0.5, 5.0, GridSize::Continuous).unwrap();
            let positions: Vec<f64> = (0..n)
                .map(|i| {
                    let (lo, hi) = s.bounds(i).unwrap();
                    lo + fractions[i] * (hi - lo)
                })
                .collect();
            let g = array_gain(&positions, a);
            let n2 = (n * n) as f64;
            prop_assert!(g >= -1e-9 && g <= n2 + 1e-9 * n2.max(1.0));
            let shifted: Vec<f64> = positions.iter().map(|x| x + shift).collect();
            let gs = array_gain(&shifted, a);
            prop_assert!((g - gs).abs() <= 1e-7 * (1.0 + n2));
        }
    }

    #[test]
    fn gain_peak_reached_at_mirror_angle() {
        // theta and -theta share the same cosine, so the gain peaks there too
        let s = spec(3, 4.0, GridSize::Continuous);
        let layout = AntennaLayout::new(s, vec![0.2, 2.0, 4.5]).unwrap();
        let f0 = effective_gain_f0(&layout, PI / 3.0, -PI / 3.0, 1.0);
        assert!((f0 - 9.0).abs() < 1e-9);
    }
}
