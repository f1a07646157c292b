use std::f64::consts::PI;

use rustfft::FftPlanner;

use super::walk::{MAX_PE_BITS, MAX_PE_TABLE};
use super::{walk_operator, AnnotatedState, Component, EstimateGrid, QuantumState, SingularBasis, WalkOperator};
use crate::error::{QdfError, Result};
use crate::kp_tree::KPTreeSet;
use crate::ledger::CostLedger;
use crate::linalg::{CMatrix, CVector, ZERO};

/// Folded phase-register outcome read as a singular value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaOutcome {
    /// Folded register value `k = min(x, 2^b − x)`.
    pub index: usize,
    /// `‖A‖_F · cos(πk / 2^b)`.
    pub sigma: f64,
    pub probability: f64,
}

fn sigma_of(frobenius: f64, bits: u32, k: usize) -> f64 {
    frobenius * (PI * k as f64 / (1u64 << bits) as f64).cos()
}

fn check_bits(bits: u32, dim: usize) -> Result<usize> {
    if !(1..=MAX_PE_BITS).contains(&bits) {
        return Err(QdfError::input(format!("phase register width must be in 1..={MAX_PE_BITS}, got {bits}")));
    }
    let steps = 1usize << bits;
    if steps.saturating_mul(dim) > MAX_PE_TABLE {
        return Err(QdfError::Resource(format!("phase estimation table 2^{bits} x {dim} is too large")));
    }
    Ok(steps)
}

/// Folded outcome distributions for a batch of walk-space start vectors.
///
/// Columns are processed in groups so the time-series table stays within the
/// phase-estimation memory limit.
fn folded_distributions(w: &CMatrix, bits: u32, starts: &CMatrix) -> Result<Vec<Vec<f64>>> {
    let dim = w.nrows();
    let steps = check_bits(bits, dim)?;
    let half = steps / 2;
    let per_batch = (MAX_PE_TABLE / (steps * dim)).max(1);
    let fft = FftPlanner::new().plan_fft_forward(steps);
    let norm = 1.0 / (steps as f64 * steps as f64);
    let mut out = Vec::with_capacity(starts.ncols());
    let mut first = 0;
    while first < starts.ncols() {
        let cols = per_batch.min(starts.ncols() - first);
        let mut current = starts.columns(first, cols).into_owned();
        // table[(col * dim + coord) * steps + t]
        let mut table = vec![ZERO; cols * dim * steps];
        for t in 0..steps {
            for col in 0..cols {
                for coord in 0..dim {
                    table[(col * dim + coord) * steps + t] = current[(coord, col)];
                }
            }
            if t + 1 < steps {
                current = w * &current;
            }
        }
        for chunk in table.chunks_mut(steps) {
            fft.process(chunk);
        }
        for col in 0..cols {
            let mut folded = vec![0.0; half + 1];
            for coord in 0..dim {
                let series = &table[(col * dim + coord) * steps..(col * dim + coord + 1) * steps];
                for (x, z) in series.iter().enumerate() {
                    folded[x.min(steps - x)] += z.norm_sqr() * norm;
                }
            }
            out.push(folded);
        }
        first += cols;
    }
    Ok(out)
}

/// Distribution of the singular-value reading for the walk started at `Q|v⟩`.
pub fn sigma_distribution(w: &WalkOperator, bits: u32, v: &CVector) -> Result<Vec<SigmaOutcome>> {
    let start = w.embed_column_vector(v)?;
    let start = CMatrix::from_columns(&[start]);
    let folded = folded_distributions(&w.matrix, bits, &start)?.pop().expect("one column in, one out");
    Ok(folded
        .into_iter()
        .enumerate()
        .map(|(index, probability)| SigmaOutcome { index, sigma: sigma_of(w.frobenius, bits, index), probability })
        .collect())
}

fn modal(folded: &[f64]) -> usize {
    let mut best = 0;
    for (k, &p) in folded.iter().enumerate() {
        if p > folded[best] {
            best = k;
        }
    }
    best
}

/// Circuit backend.
///
/// Builds the walk operator from tree queries, runs phase estimation from
/// `Q|v_j⟩` for every singular vector carrying weight in `state`, and keeps
/// the most likely folded reading as the estimate. The resulting grid has
/// step `‖A‖_F · π / 2^bits` in phase, i.e. estimates lie on
/// `‖A‖_F cos(πk / 2^bits)`.
pub fn qsve_circuit(
    set: &KPTreeSet,
    state: &QuantumState,
    basis: &SingularBasis,
    bits: u32,
    cap: usize,
    ledger: &mut CostLedger,
) -> Result<AnnotatedState> {
    let (m, n) = set.dims();
    if basis.vectors.nrows() != n {
        return Err(QdfError::input(format!("basis acts on {} columns but the matrix has {n}", basis.vectors.nrows())));
    }
    check_bits(bits, m * n)?;
    let w = walk_operator(set, cap, ledger)?;
    let betas = basis.coefficients(state)?;
    let active: Vec<usize> = (0..betas.len()).filter(|&j| betas[j] != ZERO).collect();
    let starts: Vec<CVector> = active.iter().map(|&j| w.column_isometry() * basis.vectors.column(j)).collect();
    let folded = if starts.is_empty() {
        Vec::new()
    } else {
        folded_distributions(&w.matrix, bits, &CMatrix::from_columns(&starts))?
    };
    let components = active
        .iter()
        .zip(&folded)
        .map(|(&j, dist)| Component { beta: betas[j], index: j, estimate: sigma_of(w.frobenius, bits, modal(dist)) })
        .collect();
    let steps = 1u64 << bits;
    ledger.charge_walk_applications(steps);
    let units = steps as f64 / PI;
    ledger.charge_qsve(units);
    log::debug!("circuit QSVE: walk dim {}, {} components, {} bits", w.dim(), active.len(), bits);
    AnnotatedState::new(
        components,
        EstimateGrid::Phase { bits, scale: w.frobenius, offset: 0.0 },
        basis.dim(),
        units,
    )
}

/// Register width whose phase resolution meets `‖A‖_F · π / 2^b ≤ 2δ`.
pub fn bits_for_precision(frobenius: f64, delta: f64) -> Result<u32> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(QdfError::input(format!("precision must be positive, got {delta}")));
    }
    let need = (frobenius * PI / (2.0 * delta)).log2().ceil().max(1.0);
    if need > MAX_PE_BITS as f64 {
        return Err(QdfError::Resource(format!("precision {delta} needs {need} phase bits")));
    }
    Ok(need as u32)
}
