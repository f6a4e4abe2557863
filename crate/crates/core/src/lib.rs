//! Covert-link design for linear movable-antenna (MA) arrays.
//!
//! A transmitter's antennas slide inside disjoint per-antenna boxes
//! (optionally quantized to finite grids) while a warden runs an optimal
//! power-threshold test for the transmission, shielded by bounded log-uniform
//! noise uncertainty at both the intended receiver and the warden. The crate
//! computes the exact detection-error and outage metrics in closed form,
//! optimizes transmit power and antenna positions (maximal ratio transmission,
//! closed-form power, discrete projected gradient descent), and provides an
//! exhaustive grid oracle, a fixed-position baseline and a deterministic
//! sweep harness with CSV output.
//!
//! Everything is a pure function of its inputs: values are immutable once
//! constructed and safe to evaluate concurrently. Randomized pieces (the
//! noise sampler, extra DPGD starts) take explicit seeds.

pub mod geometry;
pub mod metrics;
pub mod optimizer;
mod rng_util;
pub mod scenario;
pub mod sweep;

pub use geometry::{
    array_gain, effective_gain_f0, phase_coefficient, steering_vector, AngleConvention,
    AntennaLayout, ArraySpec, GeometryError, GridSize, SteeringVector,
};
pub use metrics::{
    beta, outage_probability, sample_noise_power, xi_of_tau, xi_star, xi_star_from_kappa1,
    CovertnessReport, LinkBudget, MetricsError, NoiseModel,
};
pub use optimizer::{
    achievable_covertness, bound_op, discretize_op, dpgd_solve, dpgd_solve_multi,
    exhaustive_oracle, exhaustive_oracle_with_budget, feasibility_threshold, gradient_f0,
    optimal_power, solve_fpa, DpgdSettings, MrtBeamformer, SolveError, SolveResult, SolveStatus,
    DEFAULT_ORACLE_BUDGET,
};
pub use scenario::{ConfigError, Scenario, SweepPlan};
pub use sweep::{
    apply_axis, csv_string, evaluate_method, format_real, run_sweep, solve_record, write_csv,
    Method, RowStatus, SolveOptions, SweepAxis, SweepRow, CSV_HEADER,
};
