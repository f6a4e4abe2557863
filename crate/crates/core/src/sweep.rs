//! Parameter sweeps over a scenario axis with CSV output.
//!
//! Each row evaluates one method (movable-antenna DPGD, the exhaustive grid
//! oracle, or the fixed-position baseline) at one axis value. Rows appear in
//! plan order, and with fixed seeds the output is byte-identical across runs
//! except for the `wall_time_ms` column. Sweep points are independent and
//! evaluated in parallel.

use crate::geometry::{ArraySpec, GridSize};
use crate::metrics::NoiseModel;
use crate::optimizer::{
    dpgd_solve, dpgd_solve_multi, exhaustive_oracle_with_budget, solve_fpa, SolveError,
    SolveResult, SolveStatus, DEFAULT_ORACLE_BUDGET,
};
use crate::scenario::{ConfigError, Scenario, SweepPlan};
use rayon::prelude::*;
use std::fmt;
use std::io::{self, Write};
use std::time::Instant;

/// Swept scenario parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    ThetaW,
    N,
    Rate,
    RhoDb,
    L0,
    K,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SweepAxis::ThetaW => "theta_w",
            SweepAxis::N => "n",
            SweepAxis::Rate => "rate",
            SweepAxis::RhoDb => "rho_db",
            SweepAxis::L0 => "l0",
            SweepAxis::K => "k",
        };
        write!(f, "{name}")
    }
}

/// Solver selection for one sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MaDpgd,
    MaOracle,
    Fpa,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::MaDpgd => "MA_DPGD",
            Method::MaOracle => "MA_ORACLE",
            Method::Fpa => "FPA",
        };
        write!(f, "{name}")
    }
}

/// Row-level outcome. `OracleSkipped` marks oracle rows whose enumeration was
/// impossible (continuous grid) or over budget; the sweep continues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Feasible,
    Infeasible,
    OracleSkipped,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RowStatus::Feasible => "FEASIBLE",
            RowStatus::Infeasible => "INFEASIBLE",
            RowStatus::OracleSkipped => "ORACLE_SKIPPED",
        };
        write!(f, "{name}")
    }
}

/// Runtime knobs shared by the CLI and the sweep harness.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// DPGD starts: 1 keeps only the canonical start.
    pub starts: usize,
    pub seed: u64,
    /// Overrides the scenario's iteration cap when set.
    pub max_iterations: Option<usize>,
    pub oracle_budget: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            starts: 1,
            seed: 0,
            max_iterations: None,
            oracle_budget: DEFAULT_ORACLE_BUDGET,
        }
    }
}

/// One CSV row. Empty optionals serialize as empty fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_name: String,
    pub axis_value: f64,
    pub method: Method,
    pub status: RowStatus,
    pub f0: Option<f64>,
    pub p_a: Option<f64>,
    pub xi_star: Option<f64>,
    pub iterations: usize,
    pub wall_time_ms: f64,
}

pub const CSV_HEADER: &str = "axis_name,axis_value,method,status,f0,p_a,xi_star,iterations,wall_time_ms";

/// Significant digits used for reals in CSV output.
pub const CSV_SIG_DIGITS: usize = 12;

/// Shortest decimal-or-scientific rendering with `CSV_SIG_DIGITS` significant
/// digits (the `%g` style): decimal for exponents in [-4, 12), scientific
/// otherwise, trailing zeros trimmed.
pub fn format_real(value: f64) -> String {
    if value.is_nan() {
        return "nan".to_string();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if value == 0.0 {
        return "0".to_string();
    }
    let formatted = format!("{:.*e}", CSV_SIG_DIGITS - 1, value);
    let (mantissa, exp) = formatted
        .split_once('e')
        .expect("exponential format always contains e");
    let exp: i32 = exp.parse().expect("valid exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if (-4..CSV_SIG_DIGITS as i32).contains(&exp) {
        if exp >= 0 {
            let int_len = exp as usize + 1;
            if digits.len() > int_len {
                out.push_str(&digits[..int_len]);
                out.push('.');
                out.push_str(&digits[int_len..]);
            } else {
                out.push_str(digits);
                out.push_str(&"0".repeat(int_len - digits.len()));
            }
        } else {
            out.push_str("0.");
            out.push_str(&"0".repeat((-exp - 1) as usize));
            out.push_str(digits);
        }
    } else {
        out.push_str(&digits[..1]);
        if digits.len() > 1 {
            out.push('.');
            out.push_str(&digits[1..]);
        }
        out.push('e');
        out.push_str(&exp.to_string());
    }
    out
}

fn format_opt(value: Option<f64>) -> String {
    value.map(format_real).unwrap_or_default()
}

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.3}",
            self.axis_name,
            format_real(self.axis_value),
            self.method,
            self.status,
            format_opt(self.f0),
            format_opt(self.p_a),
            format_opt(self.xi_star),
            self.iterations,
            self.wall_time_ms
        )
    }
}

/// Rebuild a scenario with one axis set to `value`.
pub fn apply_axis(base: &Scenario, axis: SweepAxis, value: f64) -> Result<Scenario, ConfigError> {
    let invalid = |message: String| ConfigError::InvalidValue {
        key: "values".to_string(),
        message,
    };
    let mut scenario = base.clone();
    match axis {
        SweepAxis::ThetaW => {
            if !value.is_finite() {
                return Err(invalid("theta_w values must be finite".into()));
            }
            scenario.theta_w = value;
        }
        SweepAxis::Rate => {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid("rate values must be positive".into()));
            }
            scenario.rate = value;
        }
        SweepAxis::RhoDb => {
            scenario.noise = NoiseModel::from_db(base.noise.sigma0_sq(), value)
                .map_err(|e| invalid(e.to_string()))?;
        }
        SweepAxis::L0 => {
            scenario.array = ArraySpec::new(
                base.array.n_antennas(),
                base.array.wavelength(),
                base.array.d_min(),
                value,
                base.array.grid_sizes().to_vec(),
            )
            .map_err(|e| invalid(e.to_string()))?;
        }
        SweepAxis::N => {
            if !(value.is_finite() && value >= 1.0 && value.fract() == 0.0) {
                return Err(invalid("n values must be positive integers".into()));
            }
            let n = value as usize;
            let grids = base.array.grid_sizes();
            let uniform = grids.iter().all(|g| *g == grids[0]);
            if !uniform {
                return Err(invalid(
                    "sweeping n requires a uniform grid_sizes entry".into(),
                ));
            }
            scenario.array = ArraySpec::with_uniform_grid(
                n,
                base.array.wavelength(),
                base.array.d_min(),
                base.array.l0(),
                grids[0],
            )
            .map_err(|e| invalid(e.to_string()))?;
        }
        SweepAxis::K => {
            let grid = if value.is_infinite() && value > 0.0 {
                GridSize::Continuous
            } else if value.is_finite() && value >= 1.0 && value.fract() == 0.0 {
                GridSize::Points(value as usize)
            } else {
                return Err(invalid(
                    "k values must be positive integers or `continuous`".into(),
                ));
            };
            scenario.array = ArraySpec::with_uniform_grid(
                base.array.n_antennas(),
                base.array.wavelength(),
                base.array.d_min(),
                base.array.l0(),
                grid,
            )
            .map_err(|e| invalid(e.to_string()))?;
        }
    }
    Ok(scenario)
}

fn row_from_result(
    axis_name: String,
    axis_value: f64,
    method: Method,
    result: &SolveResult,
    noise: &NoiseModel,
    wall_time_ms: f64,
) -> SweepRow {
    let (status, p_a, xi_star) = match result.status {
        SolveStatus::Feasible => (
            RowStatus::Feasible,
            result.p_a,
            crate::optimizer::achievable_covertness(result, noise),
        ),
        SolveStatus::UltraReliabilityInfeasible => (RowStatus::Infeasible, None, None),
    };
    SweepRow {
        axis_name,
        axis_value,
        method,
        status,
        f0: Some(result.f0_value),
        p_a,
        xi_star,
        iterations: result.iterations,
        wall_time_ms,
    }
}

/// Evaluate one method on one scenario, timing the solve.
pub fn evaluate_method(
    scenario: &Scenario,
    method: Method,
    options: &SolveOptions,
    axis_name: String,
    axis_value: f64,
) -> SweepRow {
    let mut settings = scenario.dpgd.clone();
    if let Some(cap) = options.max_iterations {
        settings.max_iterations = cap;
    }
    let started = Instant::now();
    let solved = match method {
        Method::MaDpgd => {
            if options.starts > 1 {
                Ok(dpgd_solve_multi(scenario, &settings, options.starts, options.seed))
            } else {
                Ok(dpgd_solve(scenario, &settings))
            }
        }
        Method::MaOracle => exhaustive_oracle_with_budget(scenario, options.oracle_budget),
        Method::Fpa => Ok(solve_fpa(scenario)),
    };
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    match solved {
        Ok(result) => row_from_result(
            axis_name,
            axis_value,
            method,
            &result,
            &scenario.noise,
            wall_time_ms,
        ),
        Err(SolveError::ContinuousGrid { .. }) | Err(SolveError::BudgetExceeded { .. }) => {
            SweepRow {
                axis_name,
                axis_value,
                method,
                status: RowStatus::OracleSkipped,
                f0: None,
                p_a: None,
                xi_star: None,
                iterations: 0,
                wall_time_ms,
            }
        }
    }
}

/// Run a sweep. Points are evaluated in parallel; the returned rows follow
/// plan order (axis value major, method minor).
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<SweepRow>, ConfigError> {
    let mut tasks = Vec::new();
    for &value in &plan.values {
        let scenario = apply_axis(&plan.base, plan.axis, value)?;
        for &method in &plan.methods {
            tasks.push((value, method, scenario.clone()));
        }
    }
    let axis_name = plan.axis.to_string();
    Ok(tasks
        .par_iter()
        .map(|(value, method, scenario)| {
            evaluate_method(scenario, *method, &plan.options, axis_name.clone(), *value)
        })
        .collect())
}

/// Single-scenario record in the sweep schema; the axis column carries the
/// scenario's warden angle.
pub fn solve_record(scenario: &Scenario, method: Method, options: &SolveOptions) -> SweepRow {
    evaluate_method(
        scenario,
        method,
        options,
        "theta_w".to_string(),
        scenario.theta_w,
    )
}

/// Write the header plus one line per row.
pub fn write_csv<W: Write>(rows: &[SweepRow], mut writer: W) -> io::Result<()> {
    writeln!(writer, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(writer, "{}", row.to_csv_line())?;
    }
    Ok(())
}

/// CSV text of the rows (header included).
pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to a vec cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}
