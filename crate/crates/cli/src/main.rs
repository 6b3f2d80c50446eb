//! `conformal`: conformal curvature invariants and Poincare-metric expansions
//! from metric spec files.

mod commands;
mod error;
mod number;
mod report;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{ObstructionPath, Options, Outcome};
use error::CliResult;
use spec::Backend;

#[derive(Parser, Debug)]
#[command(name = "conformal", version, about = "Conformal curvature invariants of metric jets")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Scalar backend; defaults to the spec's, then rational (float for fourier specs).
    #[arg(long, global = true, value_enum)]
    backend: Option<Backend>,
    /// Degree cap of the metric jet.
    #[arg(long, global = true)]
    degree: Option<usize>,
    /// Torus grid points per axis.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Tolerance of two-path comparisons.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Step of the t-derivative in the variation check.
    #[arg(long, global = true, default_value_t = 1e-3)]
    dt: f64,
    /// Seed for randomized builtin metrics.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print JSON (the default).
    #[arg(long, global = true, conflicts_with = "table")]
    json: bool,
    /// Print an aligned text table instead of JSON.
    #[arg(long, global = true)]
    table: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Curvature tensors at the base point.
    Report {
        /// Metric spec file
        spec: PathBuf,
    },
    /// The obstruction tensor from the expansion, the closed form, or both.
    Obstruction {
        /// Metric spec file
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = ObstructionPath::Both)]
        path: ObstructionPath,
    },
    /// Coefficients of the Poincare-metric expansion at the base point.
    FgExpand {
        /// Metric spec file
        spec: PathBuf,
        /// Highest coefficient to print (at most n).
        #[arg(long)]
        order: Option<usize>,
    },
    /// Volume coefficients (jets) or the integrated log coefficient (torus).
    Volume {
        /// Metric spec file
        spec: PathBuf,
    },
    /// k_n times the log coefficient against the integral of pointwise Q (torus, n = 4).
    QCheck {
        /// Metric spec file
        spec: PathBuf,
    },
    /// Derivative of the integral of Q along g + t h against the obstruction pairing.
    Variation {
        /// Metric spec file
        spec: PathBuf,
        /// Perturbation spec file.
        perturbation: PathBuf,
        /// Also fit the log coefficient of the boundary integral.
        #[arg(long)]
        boundary: bool,
    },
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    let g = &cli.global;
    if !(g.dt.is_finite() && g.dt > 0.0) {
        return Err(error::CliError::invalid("--dt must be positive"));
    }
    if let Some(t) = g.tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(error::CliError::invalid("--tol must be non-negative"));
        }
    }
    if g.grid == Some(0) {
        return Err(error::CliError::invalid("--grid must be positive"));
    }
    let opts = Options { backend: g.backend, degree: g.degree, grid: g.grid, tol: g.tol, dt: g.dt, seed: g.seed };
    match &cli.command {
        Command::Report { spec } => commands::report(&spec::load_metric(spec)?, &opts),
        Command::Obstruction { spec, path } => commands::obstruction(&spec::load_metric(spec)?, &opts, *path),
        Command::FgExpand { spec, order } => commands::fg_expand_cmd(&spec::load_metric(spec)?, &opts, *order),
        Command::Volume { spec } => commands::volume(&spec::load_metric(spec)?, &opts),
        Command::QCheck { spec } => commands::q_check(&spec::load_metric(spec)?, &opts),
        Command::Variation { spec, perturbation, boundary } => {
            let h = spec::load_perturbation(perturbation)?;
            commands::variation(&spec::load_metric(spec)?, &h, &opts, *boundary)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors are validation failures; help and version are not errors
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if cli.global.table {
                print!("{}", report::table(&outcome.report));
            } else {
                println!("{}", serde_json::to_string_pretty(&outcome.report).expect("reports serialize"));
            }
            match outcome.failure {
                Some(msg) => {
                    let e = error::CliError::CheckFailed(msg);
                    eprintln!("check failed: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
