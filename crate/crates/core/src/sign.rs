//! Signed eigenvalue estimates of a Hermitian matrix from one QSVE run on the
//! spectrally shifted matrix `F̂ = F + ‖F‖*·I`, plus the dual-QSVE comparison
//! baseline used in benchmarks.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QdfError, Result};
use crate::kp_tree::KPTreeSet;
use crate::ledger::CostLedger;
use crate::linalg::{self, CMatrix};
use crate::problem::HermitianProblem;
use crate::qsve::{
    bits_for_precision, qsve_circuit, qsve_ideal, AnnotatedState, Backend, Component, EstimateGrid, QuantumState,
    SingularBasis, DEFAULT_CIRCUIT_CAP,
};

/// Allowed negativity of a shifted eigenvalue, relative to the shift.
const PSD_TOL: f64 = 1e-10;

/// `F + s·I` for `s ≥ ‖F‖*`.
#[derive(Clone, Debug)]
pub struct ShiftedMatrix<'a> {
    pub f_hat: CMatrix,
    pub shift: f64,
    /// `λ_i + s`, aligned with the source eigenvectors.
    pub eigenvalues: Vec<f64>,
    pub source: &'a HermitianProblem,
}

impl ShiftedMatrix<'_> {
    pub fn frobenius(&self) -> f64 {
        linalg::frobenius(&self.f_hat)
    }

    /// True when every shifted eigenvalue vanishes, i.e. `F = −s·I`.
    pub fn is_degenerate(&self) -> bool {
        let top = self.eigenvalues.iter().copied().fold(0.0, f64::max);
        top <= PSD_TOL * self.shift || self.shift == 0.0
    }

    /// Singular system of `F̂` in the source eigenbasis.
    pub fn basis(&self) -> SingularBasis {
        SingularBasis {
            values: self.eigenvalues.iter().map(|l| l.max(0.0)).collect(),
            vectors: self.source.eigenvectors().clone(),
            frobenius: self.frobenius(),
        }
    }
}

/// `F̂ = F + ‖F‖*·I`.
pub fn shift(problem: &HermitianProblem) -> ShiftedMatrix<'_> {
    shift_by(problem, problem.spectral_norm())
}

/// `F + s·I` for a user-supplied upper bound `s ≥ ‖F‖*`.
pub fn shift_with_bound(problem: &HermitianProblem, bound: f64) -> Result<ShiftedMatrix<'_>> {
    let s = problem.spectral_norm();
    if !bound.is_finite() || bound < s * (1.0 - 1e-12) {
        return Err(QdfError::input(format!("shift bound {bound} is below the spectral norm {s}")));
    }
    Ok(shift_by(problem, bound))
}

fn shift_by(problem: &HermitianProblem, s: f64) -> ShiftedMatrix<'_> {
    let n = problem.dim();
    let f_hat = problem.matrix() + CMatrix::identity(n, n) * Complex64::new(s, 0.0);
    let eigenvalues = problem.eigenvalues().iter().map(|l| l + s).collect();
    ShiftedMatrix { f_hat, shift: s, eigenvalues, source: problem }
}

/// Backend selection and sizing for the QSVE runs in this module.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignOptions {
    pub backend: Backend,
    /// Upper bound on `m·n` for the circuit backend.
    pub circuit_cap: usize,
    /// Phase register width for the circuit backend. `None` picks the
    /// smallest width with `‖A‖_F·π/2^b ≤ 2δ`.
    pub bits: Option<u32>,
    /// Shift by this bound instead of the exact `‖F‖*`.
    pub spectral_bound: Option<f64>,
}

impl Default for SignOptions {
    fn default() -> Self {
        Self { backend: Backend::Ideal, circuit_cap: DEFAULT_CIRCUIT_CAP, bits: None, spectral_bound: None }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(QdfError::input(format!("precision must be positive, got {delta}")));
    }
    Ok(())
}

/// QSVE of `a` against `basis`, with a freshly built tree.
fn run_qsve(
    a: &CMatrix,
    basis: &SingularBasis,
    state: &QuantumState,
    delta: f64,
    opts: &SignOptions,
    ledger: &mut CostLedger,
) -> Result<AnnotatedState> {
    let set = KPTreeSet::build(a)?;
    ledger.record_tree_build(set.build_cost());
    match opts.backend {
        Backend::Ideal => qsve_ideal(basis, state, delta, ledger),
        Backend::Circuit => {
            let bits = match opts.bits {
                Some(b) => b,
                None => bits_for_precision(set.frobenius(), delta)?,
            };
            qsve_circuit(&set, state, basis, bits, opts.circuit_cap, ledger)
        }
    }
}

/// `Σ β_j|v_j⟩ → Σ β_j|v_j⟩|λ̄_j⟩` with `λ̄_j = σ̄_j(F̂) − ‖F‖*`.
pub fn eigen_estimates(
    problem: &HermitianProblem,
    state: &QuantumState,
    delta: f64,
    opts: &SignOptions,
    ledger: &mut CostLedger,
) -> Result<AnnotatedState> {
    check_delta(delta)?;
    let shifted = match opts.spectral_bound {
        Some(bound) => shift_with_bound(problem, bound)?,
        None => shift(problem),
    };
    if shifted.is_degenerate() {
        return Err(QdfError::input("shifted matrix is zero: F is a non-positive multiple of the identity"));
    }
    let out = run_qsve(&shifted.f_hat, &shifted.basis(), state, delta, opts, ledger)?;
    Ok(out.shifted_down(shifted.shift))
}

/// Both sides of `‖F̂‖_F² = ‖F‖_F² + (1 + 2E(λ)/‖F‖*)·N·‖F‖*²` and the
/// worst-case bound `2√N·‖F‖*`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrobeniusIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub bound: f64,
    /// `|lhs² − rhs²| / (‖F‖_F² + N‖F‖*²)`.
    pub relative_error: f64,
}

impl FrobeniusIdentity {
    pub fn holds(&self, tol: f64) -> bool {
        self.relative_error <= tol && self.lhs <= self.bound * (1.0 + tol)
    }
}

pub fn frobenius_identity(problem: &HermitianProblem) -> FrobeniusIdentity {
    let n = problem.dim() as f64;
    let s = problem.spectral_norm();
    let fro = problem.frobenius_norm();
    let lhs = shift(problem).frobenius();
    // (1 + 2E/s)·N·s² written without dividing by s
    let rhs_sq = fro * fro + n * s * s + 2.0 * problem.mean_eig() * n * s;
    let scale = (fro * fro + n * s * s).max(f64::MIN_POSITIVE);
    FrobeniusIdentity {
        lhs,
        rhs: rhs_sq.max(0.0).sqrt(),
        bound: 2.0 * n.sqrt() * s,
        relative_error: (lhs * lhs - rhs_sq).abs() / scale,
    }
}

/// Dual-QSVE sign recovery: estimates on `F` and on `F + μI`, sign `+` when the
/// second estimate is larger.
pub fn wzp_baseline(
    problem: &HermitianProblem,
    state: &QuantumState,
    mu: f64,
    delta: f64,
    opts: &SignOptions,
    ledger: &mut CostLedger,
) -> Result<AnnotatedState> {
    check_delta(delta)?;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(QdfError::input(format!("comparison offset must be positive, got {mu}")));
    }
    if delta >= mu / 2.0 {
        return Err(QdfError::Precision(format!(
            "precision {delta} is not below half the comparison offset {mu}; signs are unreliable"
        )));
    }
    let n = problem.dim();
    let vectors = problem.eigenvectors().clone();
    let plain = SingularBasis {
        values: problem.eigenvalues().iter().map(|l| l.abs()).collect(),
        vectors: vectors.clone(),
        frobenius: problem.frobenius_norm(),
    };
    let lifted_matrix = problem.matrix() + CMatrix::identity(n, n) * Complex64::new(mu, 0.0);
    let lifted = SingularBasis {
        values: problem.eigenvalues().iter().map(|l| (l + mu).abs()).collect(),
        vectors,
        frobenius: linalg::frobenius(&lifted_matrix),
    };
    let first = run_qsve(problem.matrix(), &plain, state, delta, opts, ledger)?;
    let second = run_qsve(&lifted_matrix, &lifted, state, delta, opts, ledger)?;
    let components: Vec<Component> = first
        .components()
        .iter()
        .zip(second.components())
        .map(|(a, b)| {
            debug_assert_eq!(a.index, b.index);
            let estimate = if b.estimate > a.estimate { a.estimate } else { -a.estimate };
            Component { estimate, ..*a }
        })
        .collect();
    let grid = match first.grid() {
        EstimateGrid::Uniform { step, .. } => EstimateGrid::Uniform { step, offset: 0.0 },
        g => g,
    };
    AnnotatedState::new(components, grid, first.basis_dim(), first.query_units() + second.query_units())
}

/// Per-method totals of a sign-recovery comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub reliable: bool,
    pub tree_builds: u64,
    pub query_units: f64,
    /// `None` when the method refused to run.
    pub sign_errors: Option<usize>,
    pub max_abs_error: Option<f64>,
    pub note: Option<String>,
}

/// Spectral shift against the dual-QSVE baseline on one problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignComparison {
    pub dim: usize,
    pub kappa: f64,
    pub delta: f64,
    pub mu: f64,
    pub spectral_shift: MethodSummary,
    pub wzp: MethodSummary,
}

/// Number of components whose estimate sign disagrees with the exact one,
/// and the largest absolute error.
pub fn sign_errors(state: &AnnotatedState, exact: &[f64]) -> (usize, f64) {
    let errors = state.components().iter().filter(|c| (c.estimate > 0.0) != (exact[c.index] > 0.0)).count();
    (errors, state.max_error(exact))
}

fn summarize(method: &str, result: Result<AnnotatedState>, ledger: &CostLedger, exact: &[f64]) -> Result<MethodSummary> {
    match result {
        Ok(state) => {
            let (errors, max_err) = sign_errors(&state, exact);
            Ok(MethodSummary {
                method: method.to_string(),
                reliable: true,
                tree_builds: ledger.tree_builds(),
                query_units: ledger.qsve_query_units(),
                sign_errors: Some(errors),
                max_abs_error: Some(max_err),
                note: None,
            })
        }
        Err(QdfError::Precision(msg)) => Ok(MethodSummary {
            method: method.to_string(),
            reliable: false,
            tree_builds: ledger.tree_builds(),
            query_units: ledger.qsve_query_units(),
            sign_errors: None,
            max_abs_error: None,
            note: Some(msg),
        }),
        Err(e) => Err(e),
    }
}

/// Runs both methods on `state` with independent ledgers.
pub fn compare_sign_methods(
    problem: &HermitianProblem,
    state: &QuantumState,
    delta: f64,
    mu: f64,
    opts: &SignOptions,
) -> Result<SignComparison> {
    let exact = problem.eigenvalues();
    let mut shift_ledger = CostLedger::new();
    let shifted = eigen_estimates(problem, state, delta, opts, &mut shift_ledger);
    let mut wzp_ledger = CostLedger::new();
    let wzp = wzp_baseline(problem, state, mu, delta, opts, &mut wzp_ledger);
    Ok(SignComparison {
        dim: problem.dim(),
        kappa: problem.kappa(),
        delta,
        mu,
        spectral_shift: summarize("spectral-shift", shifted, &shift_ledger, exact)?,
        wzp: summarize("wzp", wzp, &wzp_ledger, exact)?,
    })
}
