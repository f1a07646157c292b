//! Oracles and generators shared by the integration tests. Everything here
//! is computed directly from the definitions, without going through the
//! simulator's own solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CMat {
    CMat::from_fn(m, n, |_, _| gaussian(rng))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| gaussian(rng))
}

/// `(G + G†)/2` for a Gaussian `G`.
pub fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let g = gaussian_matrix(rng, n, n);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn unit(v: &CVec) -> CVec {
    v / Complex64::new(norm(v), 0.0)
}

/// Ridge minimizer from the normal equations `(F†F + γI) w = F†y`, via LU.
pub fn ridge_oracle(f: &CMat, y: &CVec, gamma: f64) -> CVec {
    let n = f.ncols();
    let lhs = f.adjoint() * f + CMat::identity(n, n) * Complex64::new(gamma, 0.0);
    lhs.lu().solve(&(f.adjoint() * y)).expect("regularized normal matrix is invertible")
}

/// `v† F v` for a unit `v`.
pub fn rayleigh(f: &CMat, v: &CVec) -> f64 {
    (v.adjoint() * f * v)[(0, 0)].re
}

/// Trace of a Hermitian matrix.
pub fn real_trace(f: &CMat) -> f64 {
    (0..f.nrows()).map(|i| f[(i, i)].re).sum()
}

/// Largest `|λ|` of a Hermitian matrix from its singular values.
pub fn spectral_norm(f: &CMat) -> f64 {
    f.clone().singular_values().max()
}

/// `c0·√γ·λ / (λ² + γ)`, written out independently of the library.
pub fn h_ref(lambda: f64, gamma: f64, c0: f64) -> f64 {
    c0 * gamma.sqrt() * lambda / (lambda * lambda + gamma)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `k` points spaced geometrically from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64)).collect()
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..=hi)
}
