//! Command-line front end: solve a single scenario, run a parameter sweep, or
//! run the exhaustive grid oracle. Exit codes: 0 feasible, 1 configuration or
//! I/O error, 2 infeasible, 3 oracle budget exceeded.

use clap::{Parser, Subcommand};
use macovert::{
    csv_string, dpgd_solve, dpgd_solve_multi, exhaustive_oracle_with_budget, format_real,
    run_sweep, solve_record, ConfigError, Method, Scenario, SolveError, SolveOptions, SolveResult,
    SolveStatus, SweepPlan, SweepRow, DEFAULT_ORACLE_BUDGET,
};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "macovert",
    about = "Movable-antenna covert link design: covertness metrics, position optimization, sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Seed for the extra DPGD starts
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on DPGD iterations
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// Number of DPGD starts (1 = canonical start only)
    #[arg(long)]
    starts: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one scenario and print the result
    Solve {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Also write the result as a one-row CSV
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Evaluate a sweep plan and write a CSV
    Sweep {
        plan: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Exhaustively enumerate the position grids for one scenario
    Oracle {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also run DPGD and report the objective gap
        #[arg(long)]
        with_dpgd: bool,
        /// Cap on grid combinations
        #[arg(long)]
        budget: Option<u64>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

enum AppError {
    Config(ConfigError),
    Io(String),
    Solve(SolveError),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) | AppError::Io(_) => 1,
            AppError::Solve(SolveError::BudgetExceeded { .. }) => 3,
            AppError::Solve(SolveError::ContinuousGrid { .. }) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            AppError::Config(e) => format!("configuration error: {e}"),
            AppError::Io(e) => e.clone(),
            AppError::Solve(e) => format!("{e}"),
        }
    }
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e)
    }
}

fn read_file(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| AppError::Io(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), AppError> {
    fs::write(path, contents)
        .map_err(|e| AppError::Io(format!("cannot write {}: {e}", path.display())))
}

fn apply_overrides(options: &mut SolveOptions, overrides: &Overrides) {
    if let Some(seed) = overrides.seed {
        options.seed = seed;
    }
    if let Some(cap) = overrides.max_iters {
        options.max_iterations = cap.max(1).into();
    }
    if let Some(starts) = overrides.starts {
        options.starts = starts.max(1);
    }
}

fn print_result(result: &SolveResult, covertness: Option<f64>) {
    let positions: Vec<String> = result
        .layout
        .positions()
        .iter()
        .map(|&x| format_real(x))
        .collect();
    println!(
        "status: {}",
        match result.status {
            SolveStatus::Feasible => "FEASIBLE",
            SolveStatus::UltraReliabilityInfeasible => "INFEASIBLE",
        }
    );
    println!("positions: {}", positions.join(" "));
    println!("f0: {}", format_real(result.f0_value));
    match (result.p_a, covertness) {
        (Some(p_a), Some(xi)) => {
            println!("p_a: {}", format_real(p_a));
            println!("xi_star: {}", format_real(xi));
            println!("beamformer: {}", result.beamformer);
        }
        _ => println!("p_a: -\nxi_star: - (no power meets the reliability constraint)"),
    }
    let note = if !result.converged {
        " (iteration cap reached)"
    } else if result.stalled {
        " (stopped on a repeating grid point)"
    } else {
        ""
    };
    println!("iterations: {}{}", result.iterations, note);
}

fn cmd_solve(
    config: &Path,
    overrides: &Overrides,
    record: Option<&Path>,
) -> Result<u8, AppError> {
    let scenario = Scenario::parse(&read_file(config)?)?;
    let mut options = SolveOptions::default();
    apply_overrides(&mut options, overrides);
    let mut settings = scenario.dpgd.clone();
    if let Some(cap) = options.max_iterations {
        settings.max_iterations = cap;
    }
    let result = if options.starts > 1 {
        dpgd_solve_multi(&scenario, &settings, options.starts, options.seed)
    } else {
        dpgd_solve(&scenario, &settings)
    };
    let covertness = macovert::achievable_covertness(&result, &scenario.noise);
    print_result(&result, covertness);
    if let Some(path) = record {
        let row = solve_record(&scenario, Method::MaDpgd, &options);
        write_file(path, &csv_string(&[row]))?;
    }
    Ok(match result.status {
        SolveStatus::Feasible => 0,
        SolveStatus::UltraReliabilityInfeasible => 2,
    })
}

fn cmd_sweep(plan: &Path, output: &Path, overrides: &Overrides) -> Result<u8, AppError> {
    let mut plan = SweepPlan::parse(&read_file(plan)?)?;
    apply_overrides(&mut plan.options, overrides);
    let rows = run_sweep(&plan)?;
    write_file(output, &csv_string(&rows))?;
    println!("wrote {} rows to {}", rows.len(), output.display());
    Ok(0)
}

fn cmd_oracle(
    config: &Path,
    output: &Path,
    with_dpgd: bool,
    budget: Option<u64>,
    overrides: &Overrides,
) -> Result<u8, AppError> {
    let scenario = Scenario::parse(&read_file(config)?)?;
    let mut options = SolveOptions {
        oracle_budget: budget.unwrap_or(DEFAULT_ORACLE_BUDGET),
        ..SolveOptions::default()
    };
    apply_overrides(&mut options, overrides);
    let oracle =
        exhaustive_oracle_with_budget(&scenario, options.oracle_budget).map_err(AppError::Solve)?;
    let mut rows: Vec<SweepRow> = vec![];
    let oracle_row = {
        let mut row = solve_record(&scenario, Method::MaOracle, &options);
        // reuse the already-computed oracle result's timing-free fields
        row.iterations = oracle.iterations;
        row
    };
    rows.push(oracle_row);
    if with_dpgd {
        rows.push(solve_record(&scenario, Method::MaDpgd, &options));
        let dpgd_f0 = rows[1].f0.unwrap_or(f64::NAN);
        println!(
            "f0 gap (dpgd - oracle): {}",
            format_real(dpgd_f0 - oracle.f0_value)
        );
    }
    write_file(output, &csv_string(&rows))?;
    println!(
        "oracle optimum f0 = {} over {} layouts",
        format_real(oracle.f0_value),
        oracle.iterations
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's default usage-error code is 2, which this tool reserves
            // for infeasible solves
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let outcome = match &cli.command {
        Command::Solve {
            config,
            overrides,
            record,
        } => cmd_solve(config, overrides, record.as_deref()),
        Command::Sweep {
            plan,
            output,
            overrides,
        } => cmd_sweep(plan, output, overrides),
        Command::Oracle {
            config,
            output,
            with_dpgd,
            budget,
            overrides,
        } => cmd_oracle(config, output, *with_dpgd, *budget, overrides),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
