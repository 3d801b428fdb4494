//! Command-line surface for the serve-strategy estimation pipeline.
//!
//! Exit codes: 0 success, 1 internal failure, 2 bad input data, 3 bad
//! configuration/flags.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Error;
use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Debug)]
pub enum AppError {
    Input(Error),
    Config(Error),
    Internal(Error),
}

impl AppError {
    pub fn config(e: Error) -> Self {
        AppError::Config(e)
    }

    fn exit_code(&self) -> u8 {
        match self {
            AppError::Internal(_) => 1,
            AppError::Input(_) => 2,
            AppError::Config(_) => 3,
        }
    }

    fn message(&self) -> &Error {
        match self {
            AppError::Input(e) | AppError::Config(e) | AppError::Internal(e) => e,
        }
    }
}

/// Shorthand for tagging anyhow results as input errors (exit code 2).
pub trait InputExt<T> {
    fn input(self) -> Result<T, AppError>;
}

impl<T> InputExt<T> for Result<T, Error> {
    fn input(self) -> Result<T, AppError> {
        self.map_err(AppError::Input)
    }
}

#[derive(Parser)]
#[command(
    name = "servelab",
    about = "Estimate how much serve strategy is shaped by the taste for rally wins, and what it costs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Input file (points CSV for ingest, counts CSV otherwise)
    #[arg(long)]
    input: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate point-by-point data into per-player counts
    Ingest {
        #[command(flatten)]
        common: CommonArgs,
        /// Drop players with fewer charted matches than this
        #[arg(long, default_value_t = 20)]
        min_matches: u64,
    },
    /// Estimate serve probabilities, structural parameters and bounds
    Estimate {
        #[command(flatten)]
        common: CommonArgs,
        /// Bracket tolerance for the curvature fixed point
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
    /// Nonparametric salience-weight bounds and triangle geometry
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Re-optimize each player without process utility and price the change
    Counterfactual {
        #[command(flatten)]
        common: CommonArgs,
        /// Prize ladder JSON ({"rounds": R, "prizes": [r0, ..., rR]})
        #[arg(long)]
        prizes: PathBuf,
        /// Match length in sets
        #[arg(long, default_value_t = 5)]
        best_of: u32,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
    /// Alternative models: softmax curves, curvature grid, double-fault aversion
    Robustness {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated relative-curvature values
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.5,0.75,1.0,1.25,1.5,1.75,2.0"
        )]
        t_grid: Vec<f64>,
        /// Smoothing span for the orthogonality diagnostic
        #[arg(long, default_value_t = 0.5)]
        span: f64,
        /// Bootstrap replications for the diagnostic
        #[arg(long, default_value_t = 300)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
    /// Parametric-bootstrap confidence intervals for the fit parameters
    Bootstrap {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of replicates
        #[arg(long, default_value_t = 300)]
        reps: usize,
        /// Confidence level
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
}

fn validate_eps(eps: f64) -> Result<(), AppError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(AppError::config(anyhow::anyhow!(
            "--eps must be positive, got {eps}"
        )))
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Ingest {
            common,
            min_matches,
        } => commands::cmd_ingest(&common.input, &common.out, min_matches, common.format),
        Command::Estimate { common, eps } => {
            validate_eps(eps)?;
            commands::cmd_estimate(&common.input, &common.out, eps, common.format)
        }
        Command::Bounds { common } => {
            commands::cmd_bounds(&common.input, &common.out, common.format)
        }
        Command::Counterfactual {
            common,
            prizes,
            best_of,
            eps,
        } => {
            validate_eps(eps)?;
            commands::cmd_counterfactual(
                &common.input,
                &prizes,
                &common.out,
                best_of,
                eps,
                common.format,
            )
        }
        Command::Robustness {
            common,
            t_grid,
            span,
            reps,
            seed,
            eps,
        } => {
            validate_eps(eps)?;
            commands::cmd_robustness(
                &common.input,
                &common.out,
                &t_grid,
                span,
                reps,
                seed,
                eps,
                common.format,
            )
        }
        Command::Bootstrap {
            common,
            reps,
            level,
            seed,
            eps,
        } => {
            validate_eps(eps)?;
            commands::cmd_bootstrap(
                &common.input,
                &common.out,
                reps,
                level,
                seed,
                eps,
                common.format,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
