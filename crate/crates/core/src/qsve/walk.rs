use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::QuantumState;
use crate::error::{QdfError, Result};
use crate::kp_tree::KPTreeSet;
use crate::ledger::CostLedger;
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};

/// Largest `2^bits · dim` amplitude table a phase-estimation run may allocate.
pub(crate) const MAX_PE_TABLE: usize = 1 << 24;
pub const MAX_PE_BITS: u32 = 20;

/// `W = (2PP† − I)(2QQ† − I)` on `C^m ⊗ C^n`.
///
/// `P|i⟩ = |i⟩ ⊗ |A_i*⟩` uses the conjugated row state so that
/// `P†Q = A / ‖A‖_F` holds for complex entries; `Q|j⟩ = |ñ⟩ ⊗ |j⟩` with `ñ`
/// the normalized row-norm vector. A singular value `σ` of `A` yields the
/// eigenphase pair `±θ` with `cos(θ/2) = σ / ‖A‖_F`.
#[derive(Clone, Debug)]
pub struct WalkOperator {
    pub matrix: CMatrix,
    pub frobenius: f64,
    p: CMatrix,
    q: CMatrix,
}

impl WalkOperator {
    /// `Q|v⟩`, the walk-space image of a column-space vector.
    pub fn embed_column_vector(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.q.ncols() {
            return Err(QdfError::input(format!("vector of length {} for {} columns", v.len(), self.q.ncols())));
        }
        Ok(&self.q * v)
    }

    pub fn row_isometry(&self) -> &CMatrix {
        &self.p
    }

    pub fn column_isometry(&self) -> &CMatrix {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `‖W†W − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        linalg::frobenius(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(d, d)))
    }
}

/// Builds the walk operator from tree queries only.
pub fn walk_operator(set: &KPTreeSet, cap: usize, ledger: &mut CostLedger) -> Result<WalkOperator> {
    let (m, n) = set.dims();
    let dim = m * n;
    if dim > cap {
        return Err(QdfError::Resource(format!("walk operator dimension {dim} exceeds the circuit cap {cap}")));
    }
    if set.norm_tree().root() <= 0.0 {
        return Err(QdfError::input("walk operator of a zero matrix is undefined"));
    }
    let norms = set.norm_vector_state(ledger)?;
    let mut p = CMatrix::zeros(dim, m);
    for i in 0..m {
        if set.row_tree(i).root() > 0.0 {
            let row = set.row_amplitudes(i, ledger)?;
            for j in 0..n {
                p[(i * n + j, i)] = row[j].conj();
            }
        } else {
            // zero-weight row: any unit vector works, its amplitude is 0
            p[(i * n, i)] = ONE;
        }
    }
    let mut q = CMatrix::zeros(dim, n);
    for i in 0..m {
        for j in 0..n {
            q[(i * n + j, j)] = Complex64::new(norms[i], 0.0);
        }
    }
    let id = CMatrix::identity(dim, dim);
    let two = Complex64::new(2.0, 0.0);
    let refl_p = &p * p.adjoint() * two - &id;
    let refl_q = &q * q.adjoint() * two - &id;
    Ok(WalkOperator { matrix: refl_p * refl_q, frobenius: set.frobenius(), p, q })
}

/// One outcome of a phase-estimation measurement.
#[derive(Clone, Debug)]
pub struct PhaseOutcome {
    /// Register value `k`, read as the phase `2πk / 2^bits`.
    pub index: usize,
    pub phase: f64,
    pub probability: f64,
    /// Normalized system state conditioned on this outcome (zero if the
    /// outcome has probability 0).
    pub posterior: CVector,
}

#[derive(Clone, Debug)]
pub struct PhaseDistribution {
    pub bits: u32,
    pub outcomes: Vec<PhaseOutcome>,
}

impl PhaseDistribution {
    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.probability).collect()
    }

    pub fn modal(&self) -> &PhaseOutcome {
        self.outcomes
            .iter()
            .fold(&self.outcomes[0], |best, o| if o.probability > best.probability { o } else { best })
    }
}

/// Phase estimation with a `bits`-qubit register on the walk operator.
pub fn phase_estimate(w: &WalkOperator, bits: u32, state: &QuantumState) -> Result<PhaseDistribution> {
    phase_estimate_unitary(&w.matrix, bits, state.amplitudes())
}

/// Exact statevector simulation of textbook phase estimation on `u`.
///
/// After the Hadamards and controlled powers the joint state is
/// `2^{-b/2} Σ_t |t⟩ U^t|ψ⟩`; the inverse QFT on the register turns it into
/// `Σ_k |k⟩ ⊗ 2^{-b} Σ_t e^{-2πi kt/2^b} U^t|ψ⟩`, which is a DFT along `t`.
pub fn phase_estimate_unitary(u: &CMatrix, bits: u32, psi: &CVector) -> Result<PhaseDistribution> {
    if !(1..=MAX_PE_BITS).contains(&bits) {
        return Err(QdfError::input(format!("phase register width must be in 1..={MAX_PE_BITS}, got {bits}")));
    }
    let d = u.nrows();
    if !u.is_square() || psi.len() != d {
        return Err(QdfError::input("unitary and state dimensions do not match"));
    }
    let steps = 1usize << bits;
    if steps.saturating_mul(d) > MAX_PE_TABLE {
        return Err(QdfError::Resource(format!("phase estimation table 2^{bits} x {d} is too large")));
    }
    // table[coord * steps + t] = (U^t ψ)[coord]
    let mut table = vec![ZERO; d * steps];
    let mut current = psi.clone();
    for t in 0..steps {
        for (coord, z) in current.iter().enumerate() {
            table[coord * steps + t] = *z;
        }
        if t + 1 < steps {
            current = u * &current;
        }
    }
    let fft = FftPlanner::new().plan_fft_forward(steps);
    for chunk in table.chunks_mut(steps) {
        fft.process(chunk);
    }
    let scale = 1.0 / steps as f64;
    let outcomes = (0..steps)
        .map(|k| {
            let mut posterior = CVector::from_fn(d, |coord, _| table[coord * steps + k] * scale);
            let probability: f64 = posterior.iter().map(|z| z.norm_sqr()).sum();
            if probability > 0.0 {
                posterior /= Complex64::new(probability.sqrt(), 0.0);
            }
            PhaseOutcome { index: k, phase: 2.0 * PI * k as f64 / steps as f64, probability, posterior }
        })
        .collect();
    Ok(PhaseDistribution { bits, outcomes })
}
