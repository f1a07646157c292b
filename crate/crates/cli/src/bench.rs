use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use qdfsim::problem::{synth_problem, SignProfile};
use qdfsim::qsve::{Backend, QuantumState};
use qdfsim::sign::{compare_sign_methods, SignComparison, SignOptions};

use crate::args::{circuit_cap, parse_backend, parse_list};
use crate::output::write_json;
use crate::{CmdResult, Failure, Outcome};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Condition numbers, comma separated.
    #[arg(long = "kappa", default_value = "2,10,100")]
    pub kappas: String,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    /// Estimation precision shared by both methods.
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Comparison offset for the dual-QSVE method; defaults to 1/κ per row.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, default_value = "mixed")]
    pub profile: SignProfile,
    #[arg(long, default_value = "ideal", value_parser = parse_backend)]
    pub backend: Backend,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct BenchBody {
    dim: usize,
    delta: f64,
    seed: u64,
    rows: Vec<SignComparison>,
}

pub fn run(args: BenchArgs) -> CmdResult {
    let kappas: Vec<f64> = parse_list(&args.kappas).map_err(Failure::validation)?;
    if kappas.is_empty() {
        return Err(Failure::validation("no kappa values given"));
    }
    let opts = SignOptions { backend: args.backend, circuit_cap: circuit_cap()?, ..SignOptions::default() };
    let rows: Vec<SignComparison> = kappas
        .par_iter()
        .map(|&kappa| {
            let problem = synth_problem(args.seed, args.dim, kappa, args.profile)?;
            let state = QuantumState::normalized(problem.y())?;
            let mu = args.mu.unwrap_or(1.0 / kappa);
            compare_sign_methods(&problem, &state, args.delta, mu, &opts)
        })
        .collect::<Result<_, _>>()?;
    for r in &rows {
        eprintln!(
            "kappa {:>8} | shift: builds {} errors {} | wzp: builds {} {}",
            r.kappa,
            r.spectral_shift.tree_builds,
            r.spectral_shift.sign_errors.map_or("-".into(), |e| e.to_string()),
            r.wzp.tree_builds,
            match r.wzp.sign_errors {
                Some(e) => format!("errors {e}"),
                None => "unreliable".to_string(),
            }
        );
    }
    write_json(args.out.as_deref(), "bench-signs", BenchBody { dim: args.dim, delta: args.delta, seed: args.seed, rows })?;
    Ok(Outcome::Success)
}
