//! Fitting problems, the classical ridge-regression oracle, the Hermitian
//! embedding and synthetic instance generation.

use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{QdfError, Result};
use crate::linalg::{self, CMatrix, CVector, ONE};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues with `|λ| <= ZERO_EIG_TOL * ‖F‖*` are treated as exact zeros.
pub const ZERO_EIG_TOL: f64 = 1e-12;
/// Contamination threshold used by [`extract_solution`].
pub const EXTRACTION_TOL: f64 = 1e-8;

/// One `(x, y)` observation of the fitting problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSample {
    pub x: Complex64,
    pub y: Complex64,
}

impl FitSample {
    pub fn new(x: Complex64, y: Complex64) -> Result<Self> {
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !finite(x) || !finite(y) {
            return Err(QdfError::input("fit sample contains a non-finite value"));
        }
        Ok(Self { x, y })
    }
}

/// Dense `m × n` design matrix with entries `f_j(x_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    entries: CMatrix,
}

impl DesignMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(QdfError::input("design matrix must have at least one row and column"));
        }
        if !linalg::all_finite_matrix(&entries) {
            return Err(QdfError::input("design matrix has non-finite entries"));
        }
        Ok(Self { entries })
    }

    /// Evaluates each basis function on each sample.
    pub fn from_basis<B>(samples: &[FitSample], basis: &[B]) -> Result<Self>
    where
        B: Fn(Complex64) -> Complex64,
    {
        let m = samples.len();
        let n = basis.len();
        Self::new(CMatrix::from_fn(m, n, |i, j| basis[j](samples[i].x)))
    }

    /// Polynomial basis `f_j(x) = x^(j-1)` for `j = 1..=n`.
    pub fn polynomial(samples: &[FitSample], n: usize) -> Result<Self> {
        let m = samples.len();
        Self::new(CMatrix::from_fn(m, n, |i, j| samples[i].x.powu(j as u32)))
    }

    pub fn targets(samples: &[FitSample]) -> CVector {
        CVector::from_iterator(samples.len(), samples.iter().map(|s| s.y))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn shape(&self) -> (usize, usize) {
        self.entries.shape()
    }
}

/// Eigendata of a Hermitian matrix, eigenvalues sorted in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: CMatrix,
    pub spectral_norm: f64,
    pub frobenius_norm: f64,
    /// `‖F‖* / min |λ|`, infinite when some eigenvalue vanishes.
    pub kappa: f64,
    pub mean_eig: f64,
}

impl Spectrum {
    fn from_parts(eigenvalues: Vec<f64>, eigenvectors: CMatrix, frobenius_norm: f64, mean_eig: f64) -> Self {
        let spectral_norm = eigenvalues.iter().fold(0.0_f64, |acc, l| acc.max(l.abs()));
        let min_abs = eigenvalues.iter().fold(f64::INFINITY, |acc, l| acc.min(l.abs()));
        let kappa = if spectral_norm == 0.0 || min_abs <= ZERO_EIG_TOL * spectral_norm {
            f64::INFINITY
        } else {
            spectral_norm / min_abs
        };
        Self { eigenvalues, eigenvectors, spectral_norm, frobenius_norm, kappa, mean_eig }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_singular(&self) -> bool {
        !self.kappa.is_finite()
    }

    /// Indices of eigenvalues treated as exact zeros.
    pub fn null_indices(&self) -> Vec<usize> {
        let tol = ZERO_EIG_TOL * self.spectral_norm;
        (0..self.dim()).filter(|&i| self.eigenvalues[i].abs() <= tol).collect()
    }

    /// Condition number over the non-null part of the spectrum.
    pub fn support_kappa(&self) -> f64 {
        let tol = ZERO_EIG_TOL * self.spectral_norm;
        let min_abs = self
            .eigenvalues
            .iter()
            .map(|l| l.abs())
            .filter(|&a| a > tol)
            .fold(f64::INFINITY, f64::min);
        if min_abs.is_finite() {
            self.spectral_norm / min_abs
        } else {
            f64::INFINITY
        }
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.eigenvectors.column(i).into_owned()
    }

    /// `Σ_i λ_i v_i v_i†`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(i);
            out += (&v * v.adjoint()) * Complex64::new(l, 0.0);
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix.
pub fn spectral_decompose(f: &CMatrix) -> Result<Spectrum> {
    if !f.is_square() || f.nrows() == 0 {
        return Err(QdfError::input(format!("expected a non-empty square matrix, got {}x{}", f.nrows(), f.ncols())));
    }
    if !linalg::all_finite_matrix(f) {
        return Err(QdfError::input("matrix has non-finite entries"));
    }
    let defect = linalg::hermitian_defect(f);
    if defect > HERMITIAN_TOL {
        return Err(QdfError::input(format!("matrix is not Hermitian (relative defect {defect:.3e})")));
    }
    // Average with the adjoint so the solver sees an exactly Hermitian input.
    let sym = (f + f.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let n = f.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    let mean_eig = eigenvalues.iter().sum::<f64>() / n as f64;
    Ok(Spectrum::from_parts(eigenvalues, eigenvectors, linalg::frobenius(f), mean_eig))
}

/// A Hermitian fitting instance `(F, y)` with its spectral data.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianProblem {
    f: CMatrix,
    y: CVector,
    spectrum: Spectrum,
    kappa: f64,
}

impl HermitianProblem {
    pub fn new(f: CMatrix, y: CVector) -> Result<Self> {
        if y.len() != f.nrows() {
            return Err(QdfError::input(format!("y has length {} but F is {}x{}", y.len(), f.nrows(), f.ncols())));
        }
        if !linalg::all_finite_vector(&y) {
            return Err(QdfError::input("y has non-finite entries"));
        }
        let spectrum = spectral_decompose(&f)?;
        let kappa = spectrum.kappa;
        Ok(Self { f, y, spectrum, kappa })
    }

    /// Replaces the exact condition number by a declared upper bound.
    pub fn with_kappa_bound(mut self, kappa: f64) -> Result<Self> {
        if !(kappa >= 1.0) || !kappa.is_finite() {
            return Err(QdfError::input(format!("kappa bound must be finite and >= 1, got {kappa}")));
        }
        // Null directions are excluded; the pipeline checks separately that y
        // carries no weight on them.
        let exact = self.spectrum.support_kappa();
        if kappa < exact * (1.0 - 1e-12) {
            return Err(QdfError::input(format!("declared kappa {kappa} is below the exact condition number {exact}")));
        }
        self.kappa = kappa;
        Ok(self)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.f
    }

    pub fn y(&self) -> &CVector {
        &self.y
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.spectrum.eigenvectors
    }

    pub fn spectral_norm(&self) -> f64 {
        self.spectrum.spectral_norm
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.spectrum.frobenius_norm
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mean_eig(&self) -> f64 {
        self.spectrum.mean_eig
    }

    pub fn dim(&self) -> usize {
        self.f.nrows()
    }

    /// Checks every structural invariant of the instance.
    pub fn validate(&self) -> Result<()> {
        let defect = linalg::hermitian_defect(&self.f);
        if defect > HERMITIAN_TOL {
            return Err(QdfError::input(format!("F not Hermitian (defect {defect:.3e})")));
        }
        let v = &self.spectrum.eigenvectors;
        let gram = v.adjoint() * v;
        let n = self.dim();
        let ortho = linalg::frobenius(&(gram - CMatrix::identity(n, n)));
        if ortho > 1e-10 {
            return Err(QdfError::input(format!("eigenvectors not orthonormal ({ortho:.3e})")));
        }
        let s = self.spectral_norm();
        let floor = s / self.kappa;
        let slack = 1e-12 * s.max(f64::MIN_POSITIVE);
        let null = self.spectrum.null_indices();
        for (i, &l) in self.eigenvalues().iter().enumerate() {
            // exact null directions are outside the band by construction
            if null.contains(&i) && self.kappa.is_finite() {
                continue;
            }
            if l.abs() > s + slack || l.abs() < floor - slack {
                return Err(QdfError::input(format!("eigenvalue {l} outside [{floor}, {s}]")));
            }
        }
        if self.mean_eig().abs() > s + slack {
            return Err(QdfError::input("mean eigenvalue outside [-‖F‖*, ‖F‖*]"));
        }
        Ok(())
    }
}

/// Exact optimum of the regularized objective.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeSolution {
    pub w_star: CVector,
    pub objective_value: f64,
    pub gamma: f64,
}

impl RidgeSolution {
    /// `‖(F†F + γI) w* − F†y‖`.
    pub fn normal_residual(&self, f: &CMatrix, y: &CVector) -> f64 {
        let fh = f.adjoint();
        let lhs = &fh * (f * &self.w_star) + &self.w_star * Complex64::new(self.gamma, 0.0);
        linalg::vec_norm(&(lhs - fh * y))
    }
}

fn check_dims(f: &CMatrix, y: &CVector) -> Result<()> {
    if f.nrows() != y.len() {
        return Err(QdfError::input(format!("F is {}x{} but y has length {}", f.nrows(), f.ncols(), y.len())));
    }
    Ok(())
}

/// Solves `(F†F + γI) w = F†y` by a dense direct factorization.
pub fn ridge_solve(f: &CMatrix, y: &CVector, gamma: f64) -> Result<RidgeSolution> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(QdfError::input(format!("gamma must be positive and finite, got {gamma}")));
    }
    check_dims(f, y)?;
    if !linalg::all_finite_matrix(f) || !linalg::all_finite_vector(y) {
        return Err(QdfError::input("non-finite entries in F or y"));
    }
    let n = f.ncols();
    let fh = f.adjoint();
    let mut gram = &fh * f;
    for i in 0..n {
        gram[(i, i)] += Complex64::new(gamma, 0.0);
    }
    let rhs = &fh * y;
    let w_star = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => gram
            .lu()
            .solve(&rhs)
            .ok_or_else(|| QdfError::Degenerate("regularized normal matrix is singular".into()))?,
    };
    let objective_value = objective(f, y, gamma, &w_star)?;
    Ok(RidgeSolution { w_star, objective_value, gamma })
}

/// `‖Fw − y‖² + γ‖w‖²`.
pub fn objective(f: &CMatrix, y: &CVector, gamma: f64, w: &CVector) -> Result<f64> {
    check_dims(f, y)?;
    if w.len() != f.ncols() {
        return Err(QdfError::input(format!("w has length {} but F has {} columns", w.len(), f.ncols())));
    }
    let r = f * w - y;
    Ok(r.iter().map(|z| z.norm_sqr()).sum::<f64>() + gamma * w.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Builds `F̃ = [[0, F], [F†, 0]]` and `ỹ = (y, 0)`.
pub fn hermitian_embed(f: &CMatrix, y: &CVector) -> Result<(CMatrix, CVector)> {
    check_dims(f, y)?;
    let (m, n) = f.shape();
    let mut ft = CMatrix::zeros(m + n, m + n);
    ft.view_mut((0, m), (m, n)).copy_from(f);
    ft.view_mut((m, 0), (n, m)).copy_from(&f.adjoint());
    let mut yt = CVector::zeros(m + n);
    yt.rows_mut(0, m).copy_from(y);
    Ok((ft, yt))
}

/// Lower block of an embedded solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractedSolution {
    pub solution: CVector,
    /// Set when the upper block is not negligible.
    pub contaminated: bool,
}

/// Returns the last `n` components of `w̃`, flagging a non-negligible upper block.
pub fn extract_solution(w_tilde: &CVector, m: usize, n: usize) -> Result<ExtractedSolution> {
    if w_tilde.len() != m + n {
        return Err(QdfError::input(format!("expected length {} (m+n), got {}", m + n, w_tilde.len())));
    }
    let upper = linalg::vec_norm(&w_tilde.rows(0, m).into_owned());
    let total = linalg::vec_norm(w_tilde);
    let contaminated = upper > EXTRACTION_TOL * total;
    if contaminated {
        warn!("embedded solution has a non-negligible upper block ({upper:.3e} of {total:.3e})");
    }
    Ok(ExtractedSolution { solution: w_tilde.rows(m, n).into_owned(), contaminated })
}

/// Sign pattern of synthetic eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignProfile {
    AllPositive,
    AllNegative,
    Mixed,
    ZeroMean,
}

impl SignProfile {
    pub fn as_str(self) -> &'static str {
        match self {
            SignProfile::AllPositive => "all-positive",
            SignProfile::AllNegative => "all-negative",
            SignProfile::Mixed => "mixed",
            SignProfile::ZeroMean => "zero-mean",
        }
    }
}

impl fmt::Display for SignProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignProfile {
    type Err = QdfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-positive" => Ok(SignProfile::AllPositive),
            "all-negative" => Ok(SignProfile::AllNegative),
            "mixed" => Ok(SignProfile::Mixed),
            "zero-mean" => Ok(SignProfile::ZeroMean),
            other => Err(QdfError::input(format!("unknown eigenvalue sign profile '{other}'"))),
        }
    }
}

fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal folded back into `Q`.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random complex unit vector.
pub fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    let v = CVector::from_fn(n, |_, _| gaussian_complex(rng));
    let norm = linalg::vec_norm(&v);
    v / Complex64::new(norm, 0.0)
}

/// Generates a Hermitian instance with `‖F‖* = 1` and all `|λ| ∈ [1/κ, 1]`.
///
/// The largest magnitude is pinned to 1 and, when there is room, the smallest
/// to `1/κ`. The zero-mean profile pairs every eigenvalue with its negation and
/// therefore needs an even dimension. The stored `kappa` is `kappa_target`.
pub fn synth_problem(seed: u64, n: usize, kappa_target: f64, profile: SignProfile) -> Result<HermitianProblem> {
    if n < 2 {
        return Err(QdfError::input(format!("synthetic problems need N >= 2, got {n}")));
    }
    if !(kappa_target >= 1.0) || !kappa_target.is_finite() {
        return Err(QdfError::input(format!("kappa_target must be finite and >= 1, got {kappa_target}")));
    }
    if profile == SignProfile::ZeroMean && n % 2 != 0 {
        return Err(QdfError::input("zero-mean profile requires an even dimension"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = 1.0 / kappa_target;
    let magnitude = |k: usize, rng: &mut ChaCha8Rng| match k {
        0 => 1.0,
        1 => lo,
        _ => rng.random_range(lo..=1.0),
    };
    // Construction order; for zero-mean, pairs (a, -a) are adjacent so the
    // running sum below is exactly zero.
    let mut values = Vec::with_capacity(n);
    match profile {
        SignProfile::ZeroMean => {
            for k in 0..n / 2 {
                let a = magnitude(k, &mut rng);
                values.push(a);
                values.push(-a);
            }
        }
        _ => {
            for k in 0..n {
                let a = magnitude(k, &mut rng);
                let sign = match profile {
                    SignProfile::AllPositive => 1.0,
                    SignProfile::AllNegative => -1.0,
                    _ => {
                        if rng.random_bool(0.5) {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                values.push(sign * a);
            }
        }
    }
    let mean_eig = values.iter().sum::<f64>() / n as f64;
    let u = random_unitary(&mut rng, n);
    let y = random_unit_vector(&mut rng, n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, col| u[(r, order[col])]);

    let raw = &u * linalg::real_diag(&values) * u.adjoint();
    let f = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    let frob = linalg::frobenius(&f);
    let spectrum = Spectrum::from_parts(eigenvalues, eigenvectors, frob, mean_eig);
    Ok(HermitianProblem { f, y, spectrum, kappa: kappa_target })
}

/// Spectrum built from a known eigen-decomposition; used for exact test fixtures.
pub fn problem_from_eigendata(eigenvalues: &[f64], unitary: &CMatrix, y: CVector) -> Result<HermitianProblem> {
    let n = eigenvalues.len();
    if unitary.shape() != (n, n) || y.len() != n {
        return Err(QdfError::input("eigendata dimensions do not match"));
    }
    let raw = unitary * linalg::real_diag(eigenvalues) * unitary.adjoint();
    let f = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
    let sorted: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| unitary[(r, order[col])]);
    let mean = eigenvalues.iter().sum::<f64>() / n as f64;
    let spectrum = Spectrum::from_parts(sorted, vectors, linalg::frobenius(&f), mean);
    let kappa = spectrum.kappa;
    Ok(HermitianProblem { f, y, spectrum, kappa })
}
