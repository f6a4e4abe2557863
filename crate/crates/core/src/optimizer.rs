//! Transmit-side optimization: maximal ratio transmission toward the
//! receiver, the closed-form optimal transmit power, and discrete projected
//! gradient descent (DPGD) over antenna positions to minimize the effective
//! gain `f0` leaked toward the warden.
//!
//! The decomposition: with MRT the receiver gain is exactly `N`, so the
//! zero-outage constraint pins the power at `P_a = beta rho sigma0^2 / N`
//! whenever `f0 <= (1 - 1/rho^2) N^2 / beta`, and maximizing covertness
//! reduces to minimizing `f0` over the per-antenna boxes and grids. DPGD
//! iterates a gradient step, a box clamp and a nearest-grid-point snap from
//! the starting layout `(F_1, ..., F_N)` until the objective change falls
//! below the tolerance. An exhaustive oracle over finite grids and the
//! fixed-position (FPA) baseline share the same power/feasibility epilogue.

use crate::geometry::{
    array_gain, phase_coefficient, steering_vector, AngleConvention, AntennaLayout, ArraySpec,
    GridSize,
};
use crate::metrics::{beta, xi_star, CovertnessReport, LinkBudget, NoiseModel};
use crate::rng_util::uniform_in;
use crate::scenario::Scenario;
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use thiserror::Error;

/// Default cap on the number of grid combinations the exhaustive oracle will
/// evaluate.
pub const DEFAULT_ORACLE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("antenna {antenna} has a continuous position range; the exhaustive oracle needs finite grids")]
    ContinuousGrid { antenna: usize },
    #[error("grid enumeration needs {required} evaluations, over the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
}

/// Step size, stopping tolerance and iteration cap for DPGD, plus the sign
/// convention used to build the phase coefficient `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct DpgdSettings {
    pub step_size: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub angle_convention: AngleConvention,
}

impl Default for DpgdSettings {
    fn default() -> Self {
        Self {
            step_size: 1e-3,
            tolerance: 1e-5,
            max_iterations: 100_000,
            angle_convention: AngleConvention::Difference,
        }
    }
}

/// Maximal-ratio beamformer descriptor: weights follow the steering vector
/// toward the receiver for whatever layout is paired with it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrtBeamformer {
    pub steer_theta: f64,
}

impl MrtBeamformer {
    /// Unit-norm weight vector `h_ab / |h_ab|` for a layout.
    pub fn weights(&self, layout: &AntennaLayout) -> Vec<Complex64> {
        let sv = steering_vector(layout, self.steer_theta, layout.spec().wavelength());
        let scale = 1.0 / (sv.len() as f64).sqrt();
        sv.entries.into_iter().map(|e| e * scale).collect()
    }
}

impl fmt::Display for MrtBeamformer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MRT toward theta = {} rad", self.steer_theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Feasible,
    /// No transmit power satisfies both zero outage and the covertness
    /// constraint at the returned layout.
    UltraReliabilityInfeasible,
}

/// Optimized configuration: final layout, power (absent when infeasible),
/// beamformer, objective value, covertness report and the iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub layout: AntennaLayout,
    pub p_a: Option<f64>,
    pub beamformer: MrtBeamformer,
    pub f0_value: f64,
    pub covertness: Option<CovertnessReport>,
    pub status: SolveStatus,
    /// False when the iteration cap was reached before the objective change
    /// fell below the tolerance; the best iterate seen is returned then.
    pub converged: bool,
    /// True when the run ended because the snap step kept returning the same
    /// grid point even though the continuous candidate still moved.
    pub stalled: bool,
    pub iterations: usize,
    /// `(iteration, f0)` pairs for every iterate, starting at iteration 0.
    pub trace: Vec<(usize, f64)>,
}

/// Largest `f0` for which the zero-outage power still leaves the warden an
/// error floor: `(1 - 1/rho^2) * N^2 / beta`.
pub fn feasibility_threshold(n: usize, rate: f64, noise: &NoiseModel) -> f64 {
    let rho = noise.rho();
    let n = n as f64;
    (1.0 - 1.0 / (rho * rho)) * n * n / beta(rate)
}

/// Closed-form optimal transmit power `beta rho sigma0^2 / N`, or `None` when
/// the effective warden gain exceeds the feasibility threshold (the problem
/// is unsolvable at that layout). Independent of `f0` whenever feasible.
pub fn optimal_power(n: usize, rate: f64, noise: &NoiseModel, f0_value: f64) -> Option<f64> {
    if f0_value <= feasibility_threshold(n, rate, noise) {
        Some(beta(rate) * noise.rho() * noise.sigma0_sq() / n as f64)
    } else {
        None
    }
}

/// Gradient of the squared array factor at `positions` for phase coefficient
/// `a`: component `n` is `2a (T1 cos(a x_n) - T2 sin(a x_n))`.
pub fn gradient_f0(positions: &[f64], phase_coeff: f64) -> Vec<f64> {
    let trig: Vec<(f64, f64)> = positions
        .iter()
        .map(|&x| (phase_coeff * x).sin_cos())
        .collect();
    let t1: f64 = trig.iter().map(|t| t.0).sum();
    let t2: f64 = trig.iter().map(|t| t.1).sum();
    trig.iter()
        .map(|&(s, c)| 2.0 * phase_coeff * (t1 * c - t2 * s))
        .collect()
}

/// Component-wise clamp of a candidate onto the per-antenna boxes.
pub fn bound_op(candidate: &[f64], spec: &ArraySpec) -> Vec<f64> {
    candidate
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let (lo, hi) = spec.bounds(i).expect("candidate length matches spec");
            x.clamp(lo, hi)
        })
        .collect()
}

/// Nearest grid point of a sorted grid; exact midpoint ties snap to the
/// lower-index point.
fn snap_to_grid(grid: &[f64], v: f64) -> f64 {
    let hi = grid.partition_point(|&g| g <= v);
    if hi == 0 {
        return grid[0];
    }
    if hi == grid.len() {
        return grid[grid.len() - 1];
    }
    let lo = hi - 1;
    if v - grid[lo] <= grid[hi] - v {
        grid[lo]
    } else {
        grid[hi]
    }
}

/// Snap each component to its antenna's grid; continuous antennas pass
/// through unchanged. Candidates are expected to be box-feasible already.
pub fn discretize_op(candidate: &[f64], spec: &ArraySpec) -> Vec<f64> {
    candidate
        .iter()
        .enumerate()
        .map(|(i, &x)| match spec.grid_sizes()[i] {
            GridSize::Continuous => x,
            GridSize::Points(_) => {
                let grid = spec.grid(i).expect("finite grid");
                snap_to_grid(&grid, x)
            }
        })
        .collect()
}

struct RunOutcome {
    positions: Vec<f64>,
    f0: f64,
    iterations: usize,
    converged: bool,
    stalled: bool,
    trace: Vec<(usize, f64)>,
}

/// One DPGD run from a feasible start. `grids[i]` is `None` for continuous
/// antennas.
fn dpgd_run(
    start: Vec<f64>,
    phase_coeff: f64,
    bounds: &[(f64, f64)],
    grids: &[Option<Vec<f64>>],
    settings: &DpgdSettings,
) -> RunOutcome {
    let n = start.len();
    let mut x = start;
    let mut f_prev = array_gain(&x, phase_coeff);
    let mut trace = vec![(0usize, f_prev)];
    let mut best_x = x.clone();
    let mut best_f = f_prev;
    let mut converged = false;
    let mut stalled = false;
    let mut iterations = 0;
    let mut trig = vec![(0.0f64, 0.0f64); n];
    for t in 1..=settings.max_iterations {
        for (slot, &xi) in trig.iter_mut().zip(x.iter()) {
            *slot = (phase_coeff * xi).sin_cos();
        }
        let t1: f64 = trig.iter().map(|t| t.0).sum();
        let t2: f64 = trig.iter().map(|t| t.1).sum();
        let mut candidate_moved = false;
        let mut iterate_changed = false;
        for i in 0..n {
            let (s, c) = trig[i];
            let grad = 2.0 * phase_coeff * (t1 * c - t2 * s);
            let old = x[i];
            let mut v = old - settings.step_size * grad;
            let (lo, hi) = bounds[i];
            v = v.clamp(lo, hi);
            if v != old {
                candidate_moved = true;
            }
            if let Some(grid) = &grids[i] {
                v = snap_to_grid(grid, v);
            }
            if v != old {
                iterate_changed = true;
            }
            x[i] = v;
        }
        let f_new = array_gain(&x, phase_coeff);
        iterations = t;
        trace.push((t, f_new));
        if f_new < best_f {
            best_f = f_new;
            best_x = x.clone();
        }
        let delta = (f_new - f_prev).abs();
        f_prev = f_new;
        if delta <= settings.tolerance {
            converged = true;
            stalled = candidate_moved && !iterate_changed;
            break;
        }
    }
    if !converged {
        // iteration cap hit: fall back to the best iterate seen
        x = best_x;
        f_prev = best_f;
    }
    RunOutcome {
        positions: x,
        f0: f_prev,
        iterations,
        converged,
        stalled,
        trace,
    }
}

/// Shared power/feasibility epilogue: verify the zero-outage constraint,
/// attach the closed-form power, the MRT beamformer and the covertness
/// report.
fn finish(scenario: &Scenario, outcome: RunOutcome) -> SolveResult {
    let n = scenario.array.n_antennas();
    let layout = AntennaLayout::new(scenario.array.clone(), outcome.positions)
        .expect("iterates stay inside the per-antenna boxes");
    let beamformer = MrtBeamformer {
        steer_theta: scenario.theta_b,
    };
    match optimal_power(n, scenario.rate, &scenario.noise, outcome.f0) {
        Some(p_a) => {
            let budget = LinkBudget::mrt(n, outcome.f0, p_a, scenario.rate)
                .expect("feasible solve yields a valid budget");
            let covertness = xi_star(&budget, &scenario.noise);
            SolveResult {
                layout,
                p_a: Some(p_a),
                beamformer,
                f0_value: outcome.f0,
                covertness: Some(covertness),
                status: SolveStatus::Feasible,
                converged: outcome.converged,
                stalled: outcome.stalled,
                iterations: outcome.iterations,
                trace: outcome.trace,
            }
        }
        None => SolveResult {
            layout,
            p_a: None,
            beamformer,
            f0_value: outcome.f0,
            covertness: None,
            status: SolveStatus::UltraReliabilityInfeasible,
            converged: outcome.converged,
            stalled: outcome.stalled,
            iterations: outcome.iterations,
            trace: outcome.trace,
        },
    }
}

struct SolverInputs {
    phase_coeff: f64,
    bounds: Vec<(f64, f64)>,
    grids: Vec<Option<Vec<f64>>>,
}

fn solver_inputs(scenario: &Scenario, settings: &DpgdSettings) -> SolverInputs {
    let spec = &scenario.array;
    let a = phase_coefficient(
        scenario.theta_b,
        scenario.theta_w,
        spec.wavelength(),
        settings.angle_convention,
    );
    let bounds: Vec<(f64, f64)> = (0..spec.n_antennas())
        .map(|i| spec.bounds(i).expect("index in range"))
        .collect();
    let grids: Vec<Option<Vec<f64>>> = (0..spec.n_antennas())
        .map(|i| match spec.grid_sizes()[i] {
            GridSize::Continuous => None,
            GridSize::Points(_) => Some(spec.grid(i).expect("finite grid")),
        })
        .collect();
    SolverInputs {
        phase_coeff: a,
        bounds,
        grids,
    }
}

fn canonical_start(inputs: &SolverInputs) -> Vec<f64> {
    inputs
        .bounds
        .iter()
        .zip(inputs.grids.iter())
        .map(|(&(lo, _), grid)| match grid {
            Some(g) => snap_to_grid(g, lo),
            None => lo,
        })
        .collect()
}

/// Discrete projected gradient descent from the canonical start
/// `(F_1, ..., F_N)`, followed by the ultra-reliability verification.
pub fn dpgd_solve(scenario: &Scenario, settings: &DpgdSettings) -> SolveResult {
    let inputs = solver_inputs(scenario, settings);
    let start = canonical_start(&inputs);
    let outcome = dpgd_run(start, inputs.phase_coeff, &inputs.bounds, &inputs.grids, settings);
    finish(scenario, outcome)
}

/// DPGD with `starts - 1` extra seeded random starts on top of the canonical
/// one; returns the run with the lowest final objective (earlier run wins
/// ties). `starts = 1` reproduces `dpgd_solve` exactly.
pub fn dpgd_solve_multi(
    scenario: &Scenario,
    settings: &DpgdSettings,
    starts: usize,
    seed: u64,
) -> SolveResult {
    let inputs = solver_inputs(scenario, settings);
    let canonical = canonical_start(&inputs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<RunOutcome> = None;
    for s in 0..starts.max(1) {
        let start = if s == 0 {
            canonical.clone()
        } else {
            inputs
                .bounds
                .iter()
                .zip(inputs.grids.iter())
                .map(|(&(lo, hi), grid)| {
                    let v = uniform_in(&mut rng, lo, hi);
                    match grid {
                        Some(g) => snap_to_grid(g, v),
                        None => v,
                    }
                })
                .collect()
        };
        let outcome =
            dpgd_run(start, inputs.phase_coeff, &inputs.bounds, &inputs.grids, settings);
        let better = match &best {
            None => true,
            Some(b) => outcome.f0 < b.f0,
        };
        if better {
            best = Some(outcome);
        }
    }
    finish(scenario, best.expect("at least one start"))
}

/// Brute-force global minimizer of `f0` over every grid combination, with the
/// same power/feasibility epilogue as DPGD. Ties resolve to the
/// lexicographically smallest index vector. Requires finite grids and at most
/// `budget` combinations.
pub fn exhaustive_oracle_with_budget(
    scenario: &Scenario,
    budget: u64,
) -> Result<SolveResult, SolveError> {
    let spec = &scenario.array;
    let n = spec.n_antennas();
    let mut grids: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        match spec.grid_sizes()[i] {
            GridSize::Continuous => return Err(SolveError::ContinuousGrid { antenna: i }),
            GridSize::Points(_) => grids.push(spec.grid(i).expect("finite grid")),
        }
    }
    let required: u128 = grids.iter().map(|g| g.len() as u128).product();
    if required > budget as u128 {
        return Err(SolveError::BudgetExceeded { required, budget });
    }
    let a = phase_coefficient(
        scenario.theta_b,
        scenario.theta_w,
        spec.wavelength(),
        settings_convention(scenario),
    );
    // per-antenna (sin, cos) tables remove all trig from the enumeration
    let trig: Vec<Vec<(f64, f64)>> = grids
        .iter()
        .map(|g| g.iter().map(|&x| (a * x).sin_cos()).collect())
        .collect();
    let mut indices = vec![0usize; n];
    let mut best_f = f64::INFINITY;
    let mut best_indices = indices.clone();
    let mut evaluated: usize = 0;
    loop {
        let (mut t1, mut t2) = (0.0f64, 0.0f64);
        for (i, &k) in indices.iter().enumerate() {
            let (s, c) = trig[i][k];
            t1 += s;
            t2 += c;
        }
        let f = t1 * t1 + t2 * t2;
        evaluated += 1;
        // strict improvement keeps the first (lexicographically smallest) tie
        if f < best_f {
            best_f = f;
            best_indices.copy_from_slice(&indices);
        }
        // odometer increment, last antenna fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < grids[pos].len() {
                break;
            }
            indices[pos] = 0;
            if pos == 0 {
                pos = usize::MAX;
                break;
            }
        }
        if pos == usize::MAX {
            break;
        }
    }
    let positions: Vec<f64> = best_indices
        .iter()
        .enumerate()
        .map(|(i, &k)| grids[i][k])
        .collect();
    Ok(finish(
        scenario,
        RunOutcome {
            positions,
            f0: best_f,
            iterations: evaluated,
            converged: true,
            stalled: false,
            trace: Vec::new(),
        },
    ))
}

/// `exhaustive_oracle_with_budget` at the default budget.
pub fn exhaustive_oracle(scenario: &Scenario) -> Result<SolveResult, SolveError> {
    exhaustive_oracle_with_budget(scenario, DEFAULT_ORACLE_BUDGET)
}

fn settings_convention(scenario: &Scenario) -> AngleConvention {
    scenario.dpgd.angle_convention
}

/// Fixed-position baseline: the layout is pinned to `x_n = n * d_min` and
/// only the transmit power is optimized (same epilogue as DPGD).
pub fn solve_fpa(scenario: &Scenario) -> SolveResult {
    let layout = scenario.array.fpa_layout();
    let a = phase_coefficient(
        scenario.theta_b,
        scenario.theta_w,
        scenario.array.wavelength(),
        settings_convention(scenario),
    );
    let f0 = array_gain(layout.positions(), a);
    let positions = layout.positions().to_vec();
    finish(
        scenario,
        RunOutcome {
            positions,
            f0,
            iterations: 0,
            converged: true,
            stalled: false,
            trace: vec![(0, f0)],
        },
    )
}

/// Covertness achieved by a solved configuration: `xi*` at
/// `kappa1 = P_a * f0 / N` (the MRT warden gain), or `None` when the solve
/// was infeasible.
pub fn achievable_covertness(result: &SolveResult, noise: &NoiseModel) -> Option<f64> {
    match (result.status, result.p_a) {
        (SolveStatus::Feasible, Some(p_a)) => {
            let kappa1 = p_a * result.f0_value / result.layout.n_antennas() as f64;
            Some(crate::metrics::xi_star_from_kappa1(kappa1, noise).xi_star)
        }
        _ => None,
    }
}
