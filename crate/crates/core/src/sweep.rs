//! Cross-product experiments over synthetic problems.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{QdfError, Result};
use crate::pipeline::{run, PipelineConfig};
use crate::problem::{synth_problem, SignProfile};

/// Axes of a sweep; every combination becomes one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepAxes {
    pub dims: Vec<usize>,
    pub kappas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub profiles: Vec<SignProfile>,
    pub seeds: Vec<u64>,
}

impl SweepAxes {
    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("dims", self.dims.is_empty()),
            ("kappas", self.kappas.is_empty()),
            ("epsilons", self.epsilons.is_empty()),
            ("profiles", self.profiles.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(QdfError::input(format!("sweep axis '{name}' is empty")));
        }
        Ok(())
    }

    /// Points in axis order: dims, kappas, epsilons, profiles, seeds.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &n in &self.dims {
            for &kappa in &self.kappas {
                for &epsilon in &self.epsilons {
                    for &profile in &self.profiles {
                        for &seed in &self.seeds {
                            out.push(SweepPoint { n, kappa, epsilon, profile, seed });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    pub kappa: f64,
    pub epsilon: f64,
    pub profile: SignProfile,
    pub seed: u64,
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub kappa: f64,
    pub epsilon: f64,
    pub profile: SignProfile,
    pub seed: u64,
    pub gamma: f64,
    pub distance: f64,
    pub p_bar: f64,
    pub iterations: u64,
    pub amplification_iterations: u64,
    pub query_units: f64,
    pub cost: f64,
    pub guarantee_met: bool,
}

/// Runs the pipeline on `synth_problem(seed, n, κ, profile)`. The run seed is
/// the problem seed, so γ draws agree across `n` for the same seed.
pub fn run_point(point: &SweepPoint, base: &PipelineConfig) -> Result<SweepRow> {
    let problem = synth_problem(point.seed, point.n, point.kappa, point.profile)?;
    let config = PipelineConfig { epsilon: point.epsilon, seed: point.seed, ..*base };
    let report = run(&problem, &config)?;
    Ok(SweepRow {
        n: point.n,
        kappa: point.kappa,
        epsilon: point.epsilon,
        profile: point.profile,
        seed: point.seed,
        gamma: report.gamma,
        distance: report.distance,
        p_bar: report.p_bar,
        iterations: report.iterations_estimate,
        amplification_iterations: report.amplification_iterations,
        query_units: report.ledger.qsve_query_units(),
        cost: report.cost(),
        guarantee_met: report.guarantee_met,
    })
}

pub fn run_sweep(axes: &SweepAxes, base: &PipelineConfig) -> Result<Vec<SweepRow>> {
    axes.validate()?;
    axes.points().iter().map(|p| run_point(p, base)).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Mean of `value(row)` for each distinct `key(row)`, in first-seen order.
pub fn group_means(rows: &[SweepRow], key: impl Fn(&SweepRow) -> f64, value: impl Fn(&SweepRow) -> f64) -> Vec<(f64, f64)> {
    let mut groups: Vec<(f64, f64, usize)> = Vec::new();
    for r in rows {
        let k = key(r);
        match groups.iter_mut().find(|g| g.0 == k) {
            Some(g) => {
                g.1 += value(r);
                g.2 += 1;
            }
            None => groups.push((k, value(r), 1)),
        }
    }
    groups.into_iter().map(|(k, s, c)| (k, s / c as f64)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub runs: usize,
    pub max_distance: f64,
    pub violations: usize,
    /// Slope of ln(mean query units) against ln N, when N varies.
    pub units_vs_n_slope: Option<f64>,
    /// Slope of ln(mean cost) against ln N, when N varies.
    pub cost_vs_n_slope: Option<f64>,
    /// Slope of ln(mean cost) against ln κ, when κ varies.
    pub cost_vs_kappa_slope: Option<f64>,
}

fn slope_of(rows: &[SweepRow], key: impl Fn(&SweepRow) -> f64, value: impl Fn(&SweepRow) -> f64) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = group_means(rows, key, value).into_iter().unzip();
    log_log_slope(&xs, &ys)
}

pub fn summarize(rows: &[SweepRow]) -> SweepSummary {
    SweepSummary {
        runs: rows.len(),
        max_distance: rows.iter().map(|r| r.distance).fold(0.0, f64::max),
        violations: rows.iter().filter(|r| !r.guarantee_met).count(),
        units_vs_n_slope: slope_of(rows, |r| r.n as f64, |r| r.query_units),
        cost_vs_n_slope: slope_of(rows, |r| r.n as f64, |r| r.cost),
        cost_vs_kappa_slope: slope_of(rows, |r| r.kappa, |r| r.cost),
    }
}

pub fn write_rows_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for r in rows {
        writer.serialize(r).map_err(|e| QdfError::Parse(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}
