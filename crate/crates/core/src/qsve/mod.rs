//! Singular value estimation: the mapping `Σ β_j |v_j⟩ → Σ β_j |v_j⟩|σ̄_j⟩`.
//!
//! Two backends honor the same contract. [`qsve_ideal`] attaches the exact
//! singular value rounded to a uniform grid of step `δ`. [`qsve_circuit`]
//! builds the quantum walk operator from tree queries and runs an exact
//! statevector simulation of phase estimation on it.

mod circuit;
mod state;
mod walk;

pub use circuit::{bits_for_precision, qsve_circuit, sigma_distribution, SigmaOutcome};
pub use state::{AnnotatedState, Component, EstimateGrid, QuantumState};
pub use walk::{phase_estimate, MAX_PE_BITS, phase_estimate_unitary, walk_operator, PhaseDistribution, PhaseOutcome, WalkOperator};

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{QdfError, Result};
use crate::ledger::CostLedger;
use crate::linalg::{self, CMatrix};
use crate::problem::Spectrum;

/// Default cap on `m·n`, the walk operator dimension.
pub const DEFAULT_CIRCUIT_CAP: usize = 256;

/// Which QSVE implementation to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Ideal,
    Circuit,
}

impl std::str::FromStr for Backend {
    type Err = QdfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Backend::Ideal),
            "circuit" => Ok(Backend::Circuit),
            other => Err(QdfError::input(format!("unknown backend '{other}'"))),
        }
    }
}

/// Rounds `value` to the nearest multiple of `delta`, ties away from zero.
///
/// Ratios within a few ulps of a half-integer count as ties, so decimal
/// inputs such as `0.95 / 0.1` round the way they read.
pub fn quantize(value: f64, delta: f64) -> f64 {
    assert!(delta > 0.0, "quantization step must be positive");
    let r = value / delta;
    let a = r.abs();
    let frac = a - a.floor();
    let k = if (frac - 0.5).abs() <= 8.0 * f64::EPSILON * a.max(1.0) {
        a.floor() + 1.0
    } else {
        a.round()
    };
    k.copysign(r) * delta
}

/// Singular values and right singular vectors of the matrix being estimated.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularBasis {
    pub values: Vec<f64>,
    /// Column `j` is the right singular vector for `values[j]`.
    pub vectors: CMatrix,
    pub frobenius: f64,
}

impl SingularBasis {
    /// Right singular system of an arbitrary matrix. Columns beyond the rank
    /// are completed with null vectors (singular value 0).
    pub fn from_matrix(a: &CMatrix) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(QdfError::input("empty matrix"));
        }
        let frobenius = linalg::frobenius(a);
        if m >= n {
            let svd = a.clone().svd(false, true);
            let v_t = svd.v_t.ok_or_else(|| QdfError::Degenerate("SVD did not return V".into()))?;
            Ok(Self { values: svd.singular_values.iter().copied().collect(), vectors: v_t.adjoint(), frobenius })
        } else {
            let gram = a.adjoint() * a;
            let eig = SymmetricEigen::new((&gram + gram.adjoint()) * Complex64::new(0.5, 0.0));
            let values = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
            Ok(Self { values, vectors: eig.eigenvectors, frobenius })
        }
    }

    /// Singular system of a Hermitian matrix: `σ_i = |λ_i|`, same vectors.
    pub fn from_hermitian(spectrum: &Spectrum) -> Self {
        Self {
            values: spectrum.eigenvalues.iter().map(|l| l.abs()).collect(),
            vectors: spectrum.eigenvectors.clone(),
            frobenius: spectrum.frobenius_norm,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `β_j = ⟨v_j|ψ⟩`.
    pub fn coefficients(&self, state: &QuantumState) -> Result<Vec<Complex64>> {
        if state.dim() != self.vectors.nrows() {
            return Err(QdfError::input(format!(
                "state has dimension {} but the basis acts on {}",
                state.dim(),
                self.vectors.nrows()
            )));
        }
        Ok((self.vectors.adjoint() * state.amplitudes()).iter().copied().collect())
    }
}

/// Ideal backend: exact singular values rounded to the `δ` grid.
pub fn qsve_ideal(
    basis: &SingularBasis,
    state: &QuantumState,
    delta: f64,
    ledger: &mut CostLedger,
) -> Result<AnnotatedState> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(QdfError::input(format!("precision must be positive, got {delta}")));
    }
    let betas = basis.coefficients(state)?;
    let components = betas
        .into_iter()
        .enumerate()
        .filter(|(_, b)| *b != linalg::ZERO)
        .map(|(index, beta)| Component { beta, index, estimate: quantize(basis.values[index], delta) })
        .collect();
    let units = basis.frobenius / delta;
    ledger.charge_qsve(units);
    AnnotatedState::new(components, EstimateGrid::Uniform { step: delta, offset: 0.0 }, basis.dim(), units)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real_diag, real_vector};
    use approx::assert_abs_diff_eq;

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0.95, 0.1), 1.0);
        assert_abs_diff_eq!(quantize(2.0, 0.1), 2.0, epsilon = 1e-15);
        assert_eq!(quantize(-0.95, 0.1), -1.0);
        assert_eq!(quantize(0.0, 0.3), 0.0);
        assert_abs_diff_eq!(quantize(0.94, 0.1), 0.9, epsilon = 1e-15);
    }

    #[test]
    fn quantize_is_odd_and_bounded() {
        for k in 0..2000 {
            let v = -3.0 + k as f64 * 0.00317;
            for &d in &[0.1, 0.013, 0.5] {
                let q = quantize(v, d);
                assert_eq!(q, -quantize(-v, d));
                assert!((q - v).abs() <= d / 2.0 * (1.0 + 1e-12));
            }
        }
    }

    fn diag_basis() -> SingularBasis {
        SingularBasis::from_matrix(&real_diag(&[2.0, 1.0])).unwrap()
    }

    #[test]
    fn ideal_on_grid_eigenstate() {
        let mut ledger = CostLedger::new();
        let st = QuantumState::new(real_vector(&[1.0, 0.0])).unwrap();
        let out = qsve_ideal(&diag_basis(), &st, 0.1, &mut ledger).unwrap();
        assert_eq!(out.components().len(), 1);
        let comp = out.components()[0];
        assert_abs_diff_eq!(comp.beta.norm(), 1.0, epsilon = 1e-15);
        assert_eq!(comp.index, 0);
        assert_abs_diff_eq!(comp.estimate, 2.0, epsilon = 1e-14);
        assert_eq!(ledger.qsve_query_units(), 5f64.sqrt() / 0.1);
        assert_abs_diff_eq!(ledger.qsve_query_units(), 22.36, epsilon = 0.01);
    }

    #[test]
    fn ideal_superposition() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let st = QuantumState::new(real_vector(&[h, h])).unwrap();
        let out = qsve_ideal(&diag_basis(), &st, 0.1, &mut CostLedger::new()).unwrap();
        let mut est: Vec<(f64, f64)> = out.components().iter().map(|c| (c.estimate, c.beta.norm())).collect();
        est.sort_by(|a, b| b.0.total_cmp(&a.0));
        assert_abs_diff_eq!(est[0].0, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(est[1].0, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(est[0].1, h, epsilon = 1e-15);
        assert_abs_diff_eq!(est[1].1, h, epsilon = 1e-15);
    }

    #[test]
    fn ideal_rejects_mismatch() {
        let st = QuantumState::new(real_vector(&[1.0, 0.0, 0.0])).unwrap();
        assert!(matches!(qsve_ideal(&diag_basis(), &st, 0.1, &mut CostLedger::new()), Err(QdfError::Input(_))));
        let st = QuantumState::new(real_vector(&[1.0, 0.0])).unwrap();
        assert!(qsve_ideal(&diag_basis(), &st, 0.0, &mut CostLedger::new()).is_err());
    }

    #[test]
    fn wide_matrix_basis_is_complete() {
        let a = CMatrix::from_row_slice(1, 3, &[c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)]);
        let b = SingularBasis::from_matrix(&a).unwrap();
        assert_eq!(b.dim(), 3);
        let gram = b.vectors.adjoint() * &b.vectors;
        assert!(linalg::frobenius(&(gram - CMatrix::identity(3, 3))) < 1e-12);
        let mut vals = b.values.clone();
        vals.sort_by(|x, y| y.total_cmp(x));
        assert_abs_diff_eq!(vals[0], 7f64.sqrt(), epsilon = 1e-12);
        assert!(vals[1] < 1e-7 && vals[2] < 1e-7);
    }

    #[test]
    fn backend_parses() {
        assert_eq!("ideal".parse::<Backend>().unwrap(), Backend::Ideal);
        assert_eq!("circuit".parse::<Backend>().unwrap(), Backend::Circuit);
        assert!("gpu".parse::<Backend>().is_err());
    }
}
