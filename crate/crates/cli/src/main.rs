//! `crsim`: run the competing-risks simulation grid, fit single datasets,
//! and render results.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or input,
//! 3 model did not converge.

mod commands;
mod config;
mod dataset;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::Overrides;

/// A user-facing failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const IO: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const NOT_CONVERGED: u8 = 3;

    pub fn io(message: impl Into<String>) -> Self {
        Failure { code: Self::IO, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: Self::USAGE, message: message.into() }
    }

    pub fn not_converged(message: impl Into<String>) -> Self {
        Failure { code: Self::NOT_CONVERGED, message: message.into() }
    }
}

impl From<crsim::Error> for Failure {
    fn from(e: crsim::Error) -> Self {
        match &e {
            crsim::Error::Io { .. } => Failure::io(e.to_string()),
            crsim::Error::Csv { source, .. } if source.is_io_error() => Failure::io(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "crsim", version, about = "Competing-risks trial simulation: Cox vs Fine-Gray")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, env = "CRSIM_CONFIG")]
    config: Option<PathBuf>,
    /// Master seed for all replication streams.
    #[arg(long, global = true, env = "CRSIM_SEED")]
    seed: Option<u64>,
    /// Worker threads for replications.
    #[arg(long, global = true, env = "CRSIM_WORKERS")]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "CRSIM_OUT")]
    out: Option<PathBuf>,
    /// Replications per scenario cell.
    #[arg(long, global = true, env = "CRSIM_REPS")]
    reps: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the scenario grid; writes results.csv and manifest.json.
    Simulate,
    /// Fit Cox and/or Fine-Gray models to one dataset (columns time,cause,arm).
    Fit {
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelChoice::Both)]
        model: ModelChoice,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Print a results CSV as a table.
    Summarize { results: PathBuf },
    /// Render the estimate and bias figures from a results CSV.
    Plot {
        results: PathBuf,
        /// Render bias figures with fewer than four alpha panels.
        #[arg(long)]
        allow_partial: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Cox,
    Finegray,
    Both,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let overrides = Overrides { seed: cli.seed, workers: cli.workers, out: cli.out.clone(), reps: cli.reps };
    match cli.command {
        Command::Simulate => commands::simulate(cli.config.as_deref(), &overrides),
        Command::Fit { dataset, model, json } => commands::fit(&dataset, model, json),
        Command::Summarize { results } => commands::summarize(&results),
        Command::Plot { results, allow_partial } => {
            let out = cli.out.unwrap_or_else(|| PathBuf::from(config::DEFAULT_OUTPUT_DIR));
            commands::plot(&results, &out, allow_partial)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
