use std::path::PathBuf;

use clap::Args;

use qdfsim::analysis::{gamma_in_range, gamma_range, h_curve, HCurvePoint};

use crate::args::parse_list;
use crate::output::sink;
use crate::{CmdResult, Failure, Outcome};

#[derive(Debug, Args)]
pub struct HcurveArgs {
    /// Regularization weights, comma separated. Defaults to the lower end,
    /// geometric middle and upper end of the admissible interval.
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub spectral_norm: f64,
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: HcurveArgs) -> CmdResult {
    let s = args.spectral_norm;
    if !(s > 0.0) || !(args.kappa >= 1.0) || !args.kappa.is_finite() {
        return Err(Failure::validation("spectral norm must be positive and kappa finite and >= 1"));
    }
    let (low, high) = gamma_range(s, args.kappa);
    let requested: Vec<f64> = match &args.gamma {
        Some(list) => parse_list(list).map_err(Failure::validation)?,
        None => vec![low, (low * high).sqrt(), high],
    };
    let mut gammas: Vec<f64> = Vec::with_capacity(requested.len());
    for g in requested {
        if !gamma_in_range(g, s, args.kappa) {
            return Err(Failure::validation(format!("gamma {g} outside [{low}, {high}]")));
        }
        if gammas.contains(&g) {
            log::warn!("duplicate gamma {g} dropped");
            continue;
        }
        gammas.push(g);
    }
    if gammas.is_empty() {
        return Err(Failure::validation("no gamma values given"));
    }
    let series: Vec<Vec<HCurvePoint>> = gammas
        .iter()
        .map(|&g| h_curve(g, s, args.kappa, args.points, args.c0))
        .collect::<Result<_, _>>()?;
    let mut w = csv::Writer::from_writer(sink(args.out.as_deref())?);
    let mut header = vec!["lambda".to_string(), "in_band".to_string()];
    header.extend(gammas.iter().map(|g| format!("h_gamma_{g}")));
    w.write_record(&header).map_err(csv_failure)?;
    for i in 0..args.points {
        let mut rec = vec![format!("{:?}", series[0][i].lambda), series[0][i].in_band.to_string()];
        rec.extend(series.iter().map(|col| format!("{:?}", col[i].h)));
        w.write_record(&rec).map_err(csv_failure)?;
    }
    w.flush()?;
    Ok(Outcome::Success)
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure { outcome: Outcome::Io, message: e.to_string() }
}
