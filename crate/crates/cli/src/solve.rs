use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use qdfsim::io::{read_matrix, read_vector};
use qdfsim::linalg::{self, serialize_cvector, CVector};
use qdfsim::pipeline::{self, GammaMode, PipelineConfig, PipelineReport, PostselectMode, DEFAULT_BERNOULLI_TRIALS};
use qdfsim::problem::{extract_solution, hermitian_embed, HermitianProblem, HERMITIAN_TOL};
use qdfsim::qsve::Backend;

use crate::args::{circuit_cap, parse_backend, parse_postselect};
use crate::output::write_json;
use crate::{CmdResult, Failure, Outcome};

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Matrix file (CSV or JSON).
    #[arg(long)]
    pub matrix: PathBuf,
    /// Target vector file (CSV or JSON).
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Declared condition number bound; defaults to the exact value.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Fixed regularization weight instead of a log-uniform draw.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    #[arg(long, default_value = "ideal", value_parser = parse_backend)]
    pub backend: Backend,
    #[arg(long, default_value = "exact", value_parser = parse_postselect)]
    pub postselect: PostselectMode,
    /// Trials for bernoulli post-selection.
    #[arg(long, default_value_t = DEFAULT_BERNOULLI_TRIALS)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Embedding {
    rows: usize,
    cols: usize,
    embedded_dim: usize,
    /// Dimension of the block read back as the fitted parameters.
    extracted_dim: usize,
    #[serde(serialize_with = "serialize_cvector")]
    extracted_solution: CVector,
    contaminated: bool,
}

#[derive(Serialize)]
struct SolveBody {
    embedding: Option<Embedding>,
    report: PipelineReport,
}

pub fn run(args: SolveArgs) -> CmdResult {
    let f = read_matrix(&args.matrix)?;
    let y = read_vector(&args.y)?;
    if y.len() != f.nrows() {
        return Err(Failure::validation(format!(
            "y has length {} but the matrix has {} rows",
            y.len(),
            f.nrows()
        )));
    }
    let (m, n) = f.shape();
    let needs_embedding = m != n || linalg::hermitian_defect(&f) > HERMITIAN_TOL;
    let problem = if needs_embedding {
        eprintln!("note: matrix is {m}x{n} and not Hermitian; fitting its {}-dim Hermitian embedding", m + n);
        let (ft, yt) = hermitian_embed(&f, &y)?;
        HermitianProblem::new(ft, yt)?
    } else {
        HermitianProblem::new(f, y)?
    };
    let problem = match args.kappa {
        Some(k) => problem.with_kappa_bound(k)?,
        None if problem.spectrum().is_singular() => {
            let k = problem.spectrum().support_kappa();
            eprintln!("note: matrix is singular; using the condition number {k:.6} of its nonzero spectrum");
            problem.with_kappa_bound(k)?
        }
        None => problem,
    };
    let config = PipelineConfig {
        epsilon: args.epsilon,
        c0: args.c0,
        gamma: args.gamma.map_or(GammaMode::Sampled, GammaMode::Manual),
        backend: args.backend,
        postselect: args.postselect,
        bernoulli_trials: args.trials,
        seed: args.seed,
        circuit_cap: circuit_cap()?,
        circuit_bits: None,
    };
    let report = pipeline::run(&problem, &config)?;
    let embedding = if needs_embedding {
        let extracted = extract_solution(&report.w_state, m, n)?;
        eprintln!("note: extracted the {n}-dim parameter block from the embedded solution");
        Some(Embedding {
            rows: m,
            cols: n,
            embedded_dim: m + n,
            extracted_dim: n,
            extracted_solution: extracted.solution,
            contaminated: extracted.contaminated,
        })
    } else {
        None
    };
    let met = report.guarantee_met;
    if !met {
        eprintln!("error: distance {:.6e} exceeds epsilon {}", report.distance, report.epsilon);
    }
    write_json(args.out.as_deref(), "solve", SolveBody { embedding, report })?;
    Ok(if met { Outcome::Success } else { Outcome::Internal })
}
