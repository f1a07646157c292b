use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QdfError, Result};
use crate::linalg::{self, CVector};

const NORM_TOL: f64 = 1e-10;

/// Normalized amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: CVector,
}

impl QuantumState {
    /// Accepts a vector that is already normalized to within `1e-10`.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(QdfError::input(format!("state is not normalized (Σ|a|² = {norm_sq})")));
        }
        Ok(Self { amplitudes })
    }

    /// `v / ‖v‖`.
    pub fn normalized(v: &CVector) -> Result<Self> {
        let norm = linalg::vec_norm(v);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(QdfError::StateUndefined("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self { amplitudes: v / Complex64::new(norm, 0.0) })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Euclidean distance `‖|a⟩ − |b⟩‖` (no phase alignment).
    pub fn distance(&self, other: &QuantumState) -> f64 {
        linalg::vec_norm(&(&self.amplitudes - &other.amplitudes))
    }
}

/// Set of values an estimate register can hold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EstimateGrid {
    /// `offset + k·step`.
    Uniform { step: f64, offset: f64 },
    /// `offset + scale·cos(π k / 2^bits)` for `k = 0..=2^bits`.
    Phase { bits: u32, scale: f64, offset: f64 },
}

impl EstimateGrid {
    /// Worst-case spacing between neighbouring grid values.
    pub fn step(&self) -> f64 {
        match *self {
            EstimateGrid::Uniform { step, .. } => step,
            EstimateGrid::Phase { bits, scale, .. } => scale * std::f64::consts::PI / (1u64 << bits) as f64,
        }
    }

    pub fn offset(&self) -> f64 {
        match *self {
            EstimateGrid::Uniform { offset, .. } | EstimateGrid::Phase { offset, .. } => offset,
        }
    }

    pub fn shifted(&self, delta: f64) -> Self {
        match *self {
            EstimateGrid::Uniform { step, offset } => EstimateGrid::Uniform { step, offset: offset + delta },
            EstimateGrid::Phase { bits, scale, offset } => EstimateGrid::Phase { bits, scale, offset: offset + delta },
        }
    }

    /// Whether `value` is a grid point (to rounding error).
    pub fn contains(&self, value: f64) -> bool {
        match *self {
            EstimateGrid::Uniform { step, offset } => {
                let k = (value - offset) / step;
                (k - k.round()).abs() <= 1e-9 * k.abs().max(1.0)
            }
            EstimateGrid::Phase { bits, scale, offset } => {
                let half = (1u64 << (bits - 1)) as f64;
                let c = ((value - offset) / scale).clamp(-1.0, 1.0);
                let k = (c.acos() * 2.0 * half / std::f64::consts::PI).round().min(2.0 * half);
                let snapped = offset + scale * (std::f64::consts::PI * k / (2.0 * half)).cos();
                (snapped - value).abs() <= 1e-12 * (scale.abs() + offset.abs()).max(1.0)
            }
        }
    }
}

/// One term `β_j |v_j⟩|estimate_j⟩` of an annotated state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Component {
    pub beta: Complex64,
    /// Column of the decomposition the estimate refers to.
    pub index: usize,
    pub estimate: f64,
}

/// Data register in a known basis paired with an estimate register.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedState {
    components: Vec<Component>,
    grid: EstimateGrid,
    basis_dim: usize,
    query_units: f64,
}

impl AnnotatedState {
    pub fn new(components: Vec<Component>, grid: EstimateGrid, basis_dim: usize, query_units: f64) -> Result<Self> {
        let weight: f64 = components.iter().map(|c| c.beta.norm_sqr()).sum();
        if (weight - 1.0).abs() > NORM_TOL {
            return Err(QdfError::input(format!("component weights sum to {weight}, expected 1")));
        }
        if let Some(bad) = components.iter().find(|c| !grid.contains(c.estimate)) {
            return Err(QdfError::input(format!("estimate {} is not on the register grid", bad.estimate)));
        }
        if let Some(bad) = components.iter().find(|c| c.index >= basis_dim) {
            return Err(QdfError::input(format!("component index {} outside basis of size {basis_dim}", bad.index)));
        }
        Ok(Self { components, grid, basis_dim, query_units })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn grid(&self) -> EstimateGrid {
        self.grid
    }

    pub fn grid_step(&self) -> f64 {
        self.grid.step()
    }

    pub fn basis_dim(&self) -> usize {
        self.basis_dim
    }

    /// Cost units charged for producing this state.
    pub fn query_units(&self) -> f64 {
        self.query_units
    }

    /// Subtracts `shift` from every estimate.
    pub fn shifted_down(mut self, shift: f64) -> Self {
        for c in &mut self.components {
            c.estimate -= shift;
        }
        self.grid = self.grid.shifted(-shift);
        self
    }

    /// Largest `|estimate_j − exact[index_j]|`.
    pub fn max_error(&self, exact: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|c| (c.estimate - exact[c.index]).abs())
            .fold(0.0, f64::max)
    }
}
