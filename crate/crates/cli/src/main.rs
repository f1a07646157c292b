mod args;
mod bench;
mod hcurve;
mod output;
mod solve;
mod sweep;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdfsim::QdfError;

/// Simulator for quantum regularized least-squares fitting.
#[derive(Debug, Parser)]
#[command(name = "qdfsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one problem read from files and write a JSON report.
    Solve(solve::SolveArgs),
    /// Run the pipeline over a grid of synthetic problems and write CSV rows.
    Sweep(sweep::SweepArgs),
    /// Emit |h| versus |λ| series for several γ as CSV.
    Hcurve(hcurve::HcurveArgs),
    /// Compare spectral-shift and dual-QSVE sign recovery over a κ sweep.
    BenchSigns(bench::BenchArgs),
}

/// Process outcome classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success = 0,
    Io = 2,
    Validation = 3,
    Internal = 4,
}

pub struct Failure {
    pub outcome: Outcome,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { outcome: Outcome::Validation, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self { outcome: Outcome::Internal, message: message.into() }
    }
}

impl From<QdfError> for Failure {
    fn from(e: QdfError) -> Self {
        let outcome = match e {
            QdfError::Io(_) | QdfError::Parse(_) => Outcome::Io,
            QdfError::Input(_) | QdfError::StateUndefined(_) | QdfError::Precision(_) | QdfError::Resource(_) => {
                Outcome::Validation
            }
            QdfError::Degenerate(_) => Outcome::Internal,
        };
        Self { outcome, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { outcome: Outcome::Io, message: e.to_string() }
    }
}

pub type CmdResult = Result<Outcome, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Outcome::Validation as u8 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve::run(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Hcurve(a) => hcurve::run(a),
        Command::BenchSigns(a) => bench::run(a),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome as u8),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.outcome as u8)
        }
    }
}
