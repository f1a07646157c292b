//! Closed-form and numerical checks on the rotation coefficient `h`.

use serde::Serialize;

use crate::error::{QdfError, Result};
use crate::pipeline::{h, MAX_EPSILON};

/// Relative slack on interval endpoints given as floating-point products.
const RANGE_SLACK: f64 = 1e-12;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(QdfError::input(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// Admissible regularization interval `[s²/κ², s²]`.
pub fn gamma_range(spectral_norm: f64, kappa: f64) -> (f64, f64) {
    let high = spectral_norm * spectral_norm;
    (high / (kappa * kappa), high)
}

pub fn gamma_in_range(gamma: f64, spectral_norm: f64, kappa: f64) -> bool {
    let (low, high) = gamma_range(spectral_norm, kappa);
    gamma >= low * (1.0 - RANGE_SLACK) && gamma <= high * (1.0 + RANGE_SLACK)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbationCheck {
    /// `|h(λ̄) − h(λ)|`
    pub lhs: f64,
    /// `(ε/3)·|h(λ)|`
    pub rhs: f64,
    pub ok: bool,
}

/// Compares the perturbation of `h` at an estimate `λ̄` with `(ε/3)|h(λ)|`.
pub fn lemma3_check(
    lambda: f64,
    lambda_bar: f64,
    gamma: f64,
    epsilon: f64,
    kappa: f64,
    spectral_norm: f64,
) -> Result<PerturbationCheck> {
    check_positive("gamma", gamma)?;
    check_positive("spectral norm", spectral_norm)?;
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(QdfError::input(format!("kappa must be finite and >= 1, got {kappa}")));
    }
    if !(epsilon > 0.0 && epsilon <= MAX_EPSILON) {
        return Err(QdfError::input(format!("epsilon must lie in (0, 4/7], got {epsilon}")));
    }
    let low = spectral_norm / kappa;
    if lambda.abs() < low * (1.0 - RANGE_SLACK) || lambda.abs() > spectral_norm * (1.0 + RANGE_SLACK) {
        return Err(QdfError::input(format!("|lambda| = {} outside [{low}, {spectral_norm}]", lambda.abs())));
    }
    let delta = spectral_norm * epsilon / (4.0 * kappa);
    if (lambda_bar - lambda).abs() > delta * (1.0 + RANGE_SLACK) {
        return Err(QdfError::input(format!("estimate error {} exceeds delta {delta}", (lambda_bar - lambda).abs())));
    }
    let lhs = (h(lambda_bar, gamma, 1.0) - h(lambda, gamma, 1.0)).abs();
    let rhs = epsilon / 3.0 * h(lambda, gamma, 1.0).abs();
    Ok(PerturbationCheck { lhs, rhs, ok: lhs <= rhs })
}

/// Which endpoint of the band carries the minimum of `|h|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MinHBranch {
    /// `γ ≥ s²/κ`: minimum at `|λ| = s/κ`, bound `c0·s/(2√γ·κ)`.
    LowerEndpoint,
    /// `γ < s²/κ`: minimum at `|λ| = s`, bound `c0·√γ/(2s)`.
    UpperEndpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinH {
    /// Minimum of `|h|` over `|λ| ∈ [s/κ, s]`.
    pub min_value: f64,
    /// `|λ|` where the minimum is attained.
    pub argmin: f64,
    pub lower_bound: f64,
    pub branch: MinHBranch,
}

impl MinH {
    /// Value of `|h|` at the endpoint named by the branch.
    pub fn branch_endpoint(&self, gamma: f64, kappa: f64, spectral_norm: f64, c0: f64) -> f64 {
        match self.branch {
            MinHBranch::LowerEndpoint => h(spectral_norm / kappa, gamma, c0).abs(),
            MinHBranch::UpperEndpoint => h(spectral_norm, gamma, c0).abs(),
        }
    }
}

/// Minimum of `|h|` on the feasible band and its closed-form lower bound.
pub fn min_h(gamma: f64, kappa: f64, spectral_norm: f64, c0: f64) -> Result<MinH> {
    check_positive("spectral norm", spectral_norm)?;
    check_positive("c0", c0)?;
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(QdfError::input(format!("kappa must be finite and >= 1, got {kappa}")));
    }
    if !gamma_in_range(gamma, spectral_norm, kappa) {
        let (low, high) = gamma_range(spectral_norm, kappa);
        return Err(QdfError::input(format!("gamma {gamma} outside [{low}, {high}]")));
    }
    let s = spectral_norm;
    let at_low = h(s / kappa, gamma, c0).abs();
    let at_high = h(s, gamma, c0).abs();
    let (min_value, argmin) = if at_low <= at_high { (at_low, s / kappa) } else { (at_high, s) };
    let sqrt_gamma = gamma.sqrt();
    let (lower_bound, branch) = if gamma >= s * s / kappa {
        (c0 * s / (2.0 * sqrt_gamma * kappa), MinHBranch::LowerEndpoint)
    } else {
        (c0 * sqrt_gamma / (2.0 * s), MinHBranch::UpperEndpoint)
    };
    Ok(MinH { min_value, argmin, lower_bound, branch })
}

/// `⌈(2/c0)·max{√γ·κ/s, s/√γ}⌉`, the reciprocal of the band bound on `|h|`.
pub fn iteration_bound(gamma: f64, kappa: f64, spectral_norm: f64, c0: f64) -> u64 {
    let sqrt_gamma = gamma.sqrt();
    let worst = (sqrt_gamma * kappa / spectral_norm).max(spectral_norm / sqrt_gamma);
    (2.0 / c0 * worst).ceil() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpectedIterations {
    pub quadrature: f64,
    pub closed_form: f64,
    pub relative_gap: f64,
}

/// Mean of `max{√γ·κ/s, s/√γ}` for `ln γ` uniform on `[ln(s²/κ²), ln s²]`.
pub fn expected_iterations(kappa: f64, spectral_norm: f64) -> Result<ExpectedIterations> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(QdfError::input(format!("kappa must be finite and > 1, got {kappa}")));
    }
    check_positive("spectral norm", spectral_norm)?;
    let s = spectral_norm;
    let ln_s2 = (s * s).ln();
    let lo = ln_s2 - 2.0 * kappa.ln();
    let cross = ln_s2 - kappa.ln();
    let tol = 1e-14 * kappa;
    let left = quadrature::integrate(|t: f64| s * (-t / 2.0).exp(), lo, cross, tol).integral;
    let right = quadrature::integrate(|t: f64| kappa * (t / 2.0).exp() / s, cross, ln_s2, tol).integral;
    let quadrature = (left + right) / (2.0 * kappa.ln());
    let closed_form = 2.0 * (kappa - kappa.sqrt()) / kappa.ln();
    Ok(ExpectedIterations { quadrature, closed_form, relative_gap: (quadrature - closed_form).abs() / closed_form })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HCurvePoint {
    pub lambda: f64,
    pub h: f64,
    pub in_band: bool,
}

/// `|h|` on the uniform grid `s·k/n`, `k = 1..=n`.
pub fn h_curve(gamma: f64, spectral_norm: f64, kappa: f64, n_points: usize, c0: f64) -> Result<Vec<HCurvePoint>> {
    if n_points < 2 {
        return Err(QdfError::input("an h curve needs at least 2 points"));
    }
    check_positive("gamma", gamma)?;
    check_positive("spectral norm", spectral_norm)?;
    let low = spectral_norm / kappa;
    Ok((1..=n_points)
        .map(|k| {
            let lambda = spectral_norm * k as f64 / n_points as f64;
            HCurvePoint {
                lambda,
                h: h(lambda, gamma, c0).abs(),
                in_band: lambda >= low * (1.0 - RANGE_SLACK) && lambda <= spectral_norm,
            }
        })
        .collect())
}
