//! Small dense helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real_diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(m, n, |i, j| c(rows[i][j], 0.0))
}

pub fn real_vector(values: &[f64]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|&v| c(v, 0.0)))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn all_finite_matrix(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn all_finite_vector(v: &CVector) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Relative deviation of `m` from its conjugate transpose.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let scale = frobenius(m).max(f64::MIN_POSITIVE);
    frobenius(&(m - m.adjoint())) / scale
}

/// Serializes a complex vector as `[[re, im], ...]`.
pub fn serialize_cvector<S: serde::Serializer>(v: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|z| [z.re, z.im]))
}
