//! End-to-end fitting run: γ draw, `|y⟩` preparation, signed eigenvalue
//! estimation, conditional rotation by `h` and post-selection.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{gamma_in_range, gamma_range, iteration_bound};
use crate::error::{QdfError, Result};
use crate::kp_tree::KPTreeSet;
use crate::ledger::CostLedger;
use crate::linalg::{self, serialize_cvector, CMatrix, CVector};
use crate::problem::{ridge_solve, HermitianProblem};
use crate::qsve::{AnnotatedState, Backend, QuantumState, DEFAULT_CIRCUIT_CAP};
use crate::sign::{eigen_estimates, frobenius_identity, SignOptions};

/// Largest admissible target precision.
pub const MAX_EPSILON: f64 = 4.0 / 7.0;
pub const DEFAULT_BERNOULLI_TRIALS: u64 = 10_000;

/// RNG streams derived from the run seed.
const GAMMA_STREAM: u64 = 0;
const POSTSELECT_STREAM: u64 = 1;

/// `c0·√γ·λ / (λ² + γ)`.
pub fn h(lambda: f64, gamma: f64, c0: f64) -> f64 {
    c0 * gamma.sqrt() * lambda / (lambda * lambda + gamma)
}

/// Log-uniform sampler on `[low, high]`.
#[derive(Clone, Debug)]
pub struct GammaSampler {
    low: f64,
    high: f64,
    rng: ChaCha8Rng,
}

impl GammaSampler {
    pub fn new(low: f64, high: f64, seed: u64) -> Result<Self> {
        if !(low > 0.0) || !(high >= low) || !high.is_finite() {
            return Err(QdfError::input(format!("invalid gamma interval [{low}, {high}]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(GAMMA_STREAM);
        Ok(Self { low, high, rng })
    }

    /// Sampler over `[s²/κ², s²]`.
    pub fn for_problem(spectral_norm: f64, kappa: f64, seed: u64) -> Result<Self> {
        let (low, high) = gamma_range(spectral_norm, kappa);
        Self::new(low, high, seed)
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }
}

/// `e^t` with `t` uniform on `[ln low, ln high]`.
pub fn sample_gamma(sampler: &mut GammaSampler) -> f64 {
    if sampler.low == sampler.high {
        return sampler.high;
    }
    let t = sampler.rng.random_range(sampler.low.ln()..=sampler.high.ln());
    t.exp().clamp(sampler.low, sampler.high)
}

/// `|y⟩` together with its eigenbasis coefficients.
#[derive(Clone, Debug)]
pub struct PreparedState {
    pub state: QuantumState,
    /// `β_i = ⟨v_i|y⟩ / ‖y‖`.
    pub betas: Vec<Complex64>,
}

/// Loads `y` into a tree and reads `|y⟩` back from it.
pub fn prepare_y_state(problem: &HermitianProblem, ledger: &mut CostLedger) -> Result<PreparedState> {
    let y = problem.y();
    let set = KPTreeSet::build(&CMatrix::from_row_slice(1, y.len(), y.as_slice()))?;
    ledger.record_tree_build(set.build_cost());
    let amps = set.row_amplitudes(0, ledger).map_err(|e| match e {
        QdfError::StateUndefined(_) => QdfError::input("target vector y is zero"),
        other => other,
    })?;
    let state = QuantumState::new(amps)?;
    let betas = (problem.eigenvectors().adjoint() * state.amplitudes()).iter().copied().collect();
    Ok(PreparedState { state, betas })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostselectMode {
    /// Condition on the ancilla outcome with its exact probability.
    #[default]
    Exact,
    /// Sample ancilla measurements with the seeded generator.
    Bernoulli,
    /// Count `⌈1/√p̄⌉` amplitude-amplification rounds.
    Amplify,
}

impl PostselectMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PostselectMode::Exact => "exact",
            PostselectMode::Bernoulli => "bernoulli",
            PostselectMode::Amplify => "amplify",
        }
    }
}

impl std::str::FromStr for PostselectMode {
    type Err = QdfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact-conditional" => Ok(PostselectMode::Exact),
            "bernoulli" | "bernoulli-sampling" => Ok(PostselectMode::Bernoulli),
            "amplify" | "amplitude-amplification" => Ok(PostselectMode::Amplify),
            other => Err(QdfError::input(format!("unknown post-selection mode '{other}'"))),
        }
    }
}

/// Result of the conditional rotation and post-selection.
#[derive(Clone, Debug)]
pub struct Postselected {
    pub w: QuantumState,
    pub p_bar: f64,
    /// Rounds until the ancilla reads 0: 1 for exact conditioning, the first
    /// accepted trial for sampling, `⌈1/√p̄⌉` for amplification.
    pub iterations: u64,
    pub acceptance_rate: Option<f64>,
    /// Weight of components whose estimate fell below the spectral band and
    /// was rotated with coefficient 0.
    pub filtered_weight: f64,
}

/// Parameters of the rotation stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationParams {
    pub gamma: f64,
    pub c0: f64,
    pub mode: PostselectMode,
    pub trials: u64,
    pub seed: u64,
    /// Estimates with `|λ̄|` below this are treated as null directions.
    pub floor: f64,
}

/// Rotates the ancilla by `h(λ̄)`, post-selects on 0 and uncomputes the
/// estimate register. `vectors` holds the basis the components refer to.
pub fn rotate_and_postselect(
    annotated: &AnnotatedState,
    vectors: &CMatrix,
    params: &RotationParams,
    ledger: &mut CostLedger,
) -> Result<Postselected> {
    let RotationParams { gamma, c0, mode, trials, seed, floor } = *params;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(QdfError::input(format!("gamma must be positive, got {gamma}")));
    }
    if !(c0 > 0.0 && c0 < 2.0) {
        return Err(QdfError::input(format!("c0 must lie in (0, 2), got {c0}")));
    }
    let mut coeffs = CVector::zeros(vectors.nrows());
    let mut p_bar = 0.0;
    let mut filtered_weight = 0.0;
    for comp in annotated.components() {
        let rot = if comp.estimate.abs() < floor {
            filtered_weight += comp.beta.norm_sqr();
            0.0
        } else {
            h(comp.estimate, gamma, c0)
        };
        debug_assert!(rot.abs() <= 1.0);
        p_bar += comp.beta.norm_sqr() * rot * rot;
        coeffs += vectors.column(comp.index) * (comp.beta * rot);
    }
    if !(p_bar > 0.0) {
        return Err(QdfError::Degenerate("post-selection probability is zero".into()));
    }
    coeffs /= Complex64::new(p_bar.sqrt(), 0.0);
    let w = QuantumState::normalized(&coeffs)?;
    let (iterations, acceptance_rate) = match mode {
        PostselectMode::Exact => (1, None),
        PostselectMode::Bernoulli => {
            if trials == 0 {
                return Err(QdfError::input("bernoulli post-selection needs at least one trial"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(POSTSELECT_STREAM);
            let mut accepted = 0u64;
            let mut first = None;
            for t in 0..trials {
                if rng.random::<f64>() < p_bar {
                    accepted += 1;
                    first.get_or_insert(t + 1);
                }
            }
            let first =
                first.ok_or_else(|| QdfError::Degenerate(format!("no post-selection success in {trials} trials")))?;
            (first, Some(accepted as f64 / trials as f64))
        }
        PostselectMode::Amplify => {
            let rounds = (1.0 / p_bar.sqrt()).ceil() as u64;
            ledger.charge_amplification(rounds);
            for _ in 1..rounds {
                ledger.charge_qsve(annotated.query_units());
            }
            (rounds, None)
        }
    };
    Ok(Postselected { w, p_bar, iterations, acceptance_rate, filtered_weight })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum GammaMode {
    Sampled,
    Manual(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub epsilon: f64,
    pub c0: f64,
    pub gamma: GammaMode,
    pub backend: Backend,
    pub postselect: PostselectMode,
    pub bernoulli_trials: u64,
    pub seed: u64,
    pub circuit_cap: usize,
    /// Phase register width for the circuit backend; `None` derives it from δ.
    pub circuit_bits: Option<u32>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            c0: 1.0,
            gamma: GammaMode::Sampled,
            backend: Backend::Ideal,
            postselect: PostselectMode::Exact,
            bernoulli_trials: DEFAULT_BERNOULLI_TRIALS,
            seed: 0,
            circuit_cap: DEFAULT_CIRCUIT_CAP,
            circuit_bits: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= MAX_EPSILON) {
            return Err(QdfError::input(format!("epsilon must lie in (0, 4/7], got {}", self.epsilon)));
        }
        if !(self.c0 > 0.0 && self.c0 < 2.0) {
            return Err(QdfError::input(format!("c0 must lie in (0, 2), got {}", self.c0)));
        }
        if let GammaMode::Manual(g) = self.gamma {
            if !(g > 0.0) || !g.is_finite() {
                return Err(QdfError::input(format!("gamma must be positive, got {g}")));
            }
        }
        Ok(())
    }
}

/// Query-unit totals predicted for one QSVE run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnitBounds {
    /// `‖F̂‖_F / δ` from the exact norm identity.
    pub instance: f64,
    /// `8κ√N / ε`.
    pub worst_case: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    #[serde(serialize_with = "serialize_cvector")]
    pub w_state: CVector,
    #[serde(serialize_with = "serialize_cvector")]
    pub w_star_state: CVector,
    pub distance: f64,
    pub epsilon: f64,
    pub guarantee_met: bool,
    pub p_bar: f64,
    /// `Σ|β_i|² h(λ_i)²` with exact eigenvalues.
    pub p_exact: f64,
    pub gamma: f64,
    pub delta: f64,
    pub kappa: f64,
    pub spectral_norm: f64,
    pub dim: usize,
    pub c0: f64,
    /// `⌈(2/c0)·max{√γκ/s, s/√γ}⌉`.
    pub iterations_estimate: u64,
    /// `⌈1/√p̄⌉`.
    pub amplification_iterations: u64,
    /// Rounds reported by the post-selection stage.
    pub postselect_iterations: u64,
    pub acceptance_rate: Option<f64>,
    /// `max_i |h(λ̄_i)/h(λ_i) − 1|` over components with `h(λ_i) ≠ 0`.
    pub max_h_ratio_error: f64,
    /// `√(p_exact / p̄)`.
    pub sqrt_p_ratio: f64,
    /// Largest `|λ̄_i − λ_i|`.
    pub max_estimate_error: f64,
    pub filtered_weight: f64,
    pub unit_bounds: UnitBounds,
    pub backend: Backend,
    pub postselect: PostselectMode,
    pub seed: u64,
    pub ledger: CostLedger,
}

impl PipelineReport {
    /// Total QSVE cost units multiplied by the iteration bound.
    pub fn cost(&self) -> f64 {
        self.ledger.qsve_query_units() * self.iterations_estimate as f64
    }
}

/// `‖F‖*·ε / (4κ)`.
pub fn precision_for(spectral_norm: f64, epsilon: f64, kappa: f64) -> f64 {
    spectral_norm * epsilon / (4.0 * kappa)
}

/// Runs the full fitting procedure and compares with the ridge oracle.
pub fn run(problem: &HermitianProblem, config: &PipelineConfig) -> Result<PipelineReport> {
    config.validate()?;
    problem.validate()?;
    let s = problem.spectral_norm();
    let kappa = problem.kappa();
    if !(s > 0.0) {
        return Err(QdfError::input("F is the zero matrix"));
    }
    if !kappa.is_finite() {
        return Err(QdfError::input("F is singular: declare a condition number bound for its nonzero spectrum"));
    }
    let gamma = match config.gamma {
        GammaMode::Sampled => sample_gamma(&mut GammaSampler::for_problem(s, kappa, config.seed)?),
        GammaMode::Manual(g) => {
            if !gamma_in_range(g, s, kappa) {
                let (low, high) = gamma_range(s, kappa);
                return Err(QdfError::input(format!("gamma {g} outside the admissible interval [{low}, {high}]")));
            }
            g
        }
    };
    let delta = precision_for(s, config.epsilon, kappa);
    let mut ledger = CostLedger::new();
    let prepared = prepare_y_state(problem, &mut ledger)?;
    let opts = SignOptions {
        backend: config.backend,
        circuit_cap: config.circuit_cap,
        bits: config.circuit_bits,
        spectral_bound: None,
    };
    let annotated = eigen_estimates(problem, &prepared.state, delta, &opts, &mut ledger)?;
    let params = RotationParams {
        gamma,
        c0: config.c0,
        mode: config.postselect,
        trials: config.bernoulli_trials,
        seed: config.seed,
        floor: s / kappa - delta,
    };
    let post = rotate_and_postselect(&annotated, problem.eigenvectors(), &params, &mut ledger)?;

    let ridge = ridge_solve(problem.matrix(), problem.y(), gamma)?;
    let w_star = QuantumState::normalized(&ridge.w_star)?;
    let distance = post.w.distance(&w_star);

    let exact = problem.eigenvalues();
    let mut p_exact = 0.0;
    let mut max_ratio = 0.0f64;
    for comp in annotated.components() {
        let he = h(exact[comp.index], gamma, config.c0);
        p_exact += comp.beta.norm_sqr() * he * he;
        if he != 0.0 && comp.estimate.abs() >= params.floor {
            max_ratio = max_ratio.max((h(comp.estimate, gamma, config.c0) / he - 1.0).abs());
        }
    }
    let n = problem.dim() as f64;
    let identity = frobenius_identity(problem);
    let report = PipelineReport {
        w_state: post.w.into_amplitudes(),
        w_star_state: w_star.into_amplitudes(),
        distance,
        epsilon: config.epsilon,
        guarantee_met: distance <= config.epsilon,
        p_bar: post.p_bar,
        p_exact,
        gamma,
        delta,
        kappa,
        spectral_norm: s,
        dim: problem.dim(),
        c0: config.c0,
        iterations_estimate: iteration_bound(gamma, kappa, s, config.c0),
        amplification_iterations: (1.0 / post.p_bar.sqrt()).ceil() as u64,
        postselect_iterations: post.iterations,
        acceptance_rate: post.acceptance_rate,
        max_h_ratio_error: max_ratio,
        sqrt_p_ratio: (p_exact / post.p_bar).sqrt(),
        max_estimate_error: annotated.max_error(exact),
        filtered_weight: post.filtered_weight,
        unit_bounds: UnitBounds { instance: identity.rhs / delta, worst_case: 8.0 * kappa * n.sqrt() / config.epsilon },
        backend: config.backend,
        postselect: config.postselect,
        seed: config.seed,
        ledger,
    };
    if !report.guarantee_met {
        log::warn!("distance {:.3e} exceeds epsilon {}", report.distance, config.epsilon);
    }
    Ok(report)
}

/// `‖a − b‖` for unit vectors given as raw amplitudes.
pub fn state_distance(a: &CVector, b: &CVector) -> f64 {
    linalg::vec_norm(&(a - b))
}
