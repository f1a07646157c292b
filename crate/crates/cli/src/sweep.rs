use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;

use qdfsim::pipeline::{PipelineConfig, PostselectMode, DEFAULT_BERNOULLI_TRIALS};
use qdfsim::problem::SignProfile;
use qdfsim::qsve::Backend;
use qdfsim::sweep::{run_point, summarize, write_rows_csv, SweepAxes, SweepRow};

use crate::args::{circuit_cap, parse_backend, parse_list, parse_postselect, parse_u64_list};
use crate::output::{sink, write_json};
use crate::{CmdResult, Failure, Outcome};

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Problem dimensions, comma separated.
    #[arg(long)]
    pub dims: String,
    /// Condition numbers, comma separated.
    #[arg(long = "kappa")]
    pub kappas: String,
    /// Target precisions, comma separated.
    #[arg(long = "epsilon")]
    pub epsilons: String,
    /// Seeds: comma separated values or half-open ranges `lo..hi`.
    #[arg(long = "seed")]
    pub seeds: String,
    /// Sign profiles: mixed, zero-mean, all-positive, all-negative.
    #[arg(long, default_value = "mixed")]
    pub profiles: String,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    #[arg(long, default_value = "ideal", value_parser = parse_backend)]
    pub backend: Backend,
    #[arg(long, default_value = "exact", value_parser = parse_postselect)]
    pub postselect: PostselectMode,
    #[arg(long, default_value_t = DEFAULT_BERNOULLI_TRIALS)]
    pub trials: u64,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Path for the JSON summary block.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

pub fn run(args: SweepArgs) -> CmdResult {
    let axes = SweepAxes {
        dims: parse_list(&args.dims).map_err(Failure::validation)?,
        kappas: parse_list(&args.kappas).map_err(Failure::validation)?,
        epsilons: parse_list(&args.epsilons).map_err(Failure::validation)?,
        profiles: parse_list::<SignProfile>(&args.profiles).map_err(Failure::validation)?,
        seeds: parse_u64_list(&args.seeds).map_err(Failure::validation)?,
    };
    axes.validate()?;
    let base = PipelineConfig {
        c0: args.c0,
        backend: args.backend,
        postselect: args.postselect,
        bernoulli_trials: args.trials,
        circuit_cap: circuit_cap()?,
        ..PipelineConfig::default()
    };
    let rows: Vec<SweepRow> =
        axes.points().par_iter().map(|p| run_point(p, &base)).collect::<Result<_, _>>().map_err(Failure::from)?;
    write_rows_csv(sink(args.out.as_deref())?, &rows)?;
    let summary = summarize(&rows);
    eprintln!(
        "runs {} | max distance {:.3e} | violations {} | slope units~N {} | slope cost~kappa {}",
        summary.runs,
        summary.max_distance,
        summary.violations,
        fmt_slope(summary.units_vs_n_slope),
        fmt_slope(summary.cost_vs_kappa_slope)
    );
    if let Some(path) = args.summary.as_deref() {
        write_json(Some(path), "sweep", &summary)?;
    }
    Ok(if summary.violations == 0 { Outcome::Success } else { Outcome::Internal })
}

fn fmt_slope(s: Option<f64>) -> String {
    s.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}
