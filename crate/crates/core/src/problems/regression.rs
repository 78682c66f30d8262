use nalgebra::{DMatrix, DVector};

use crate::error::{PadmmError, Result};
use crate::linalg::LinearOperator;
use crate::model::{BlockSpec, ProblemSpec, SolverConfig};
use crate::oracles::{gram_max_eigenvalue, ProxLinear, QuadraticSmooth};
use crate::prox::Penalty;

/// `τ` must exceed `λ_max(𝒜ᵀ𝒜)` by this relative margin.
pub const TAU_MARGIN: f64 = 1e-6;
/// Default `τ = DEFAULT_TAU_FACTOR · λ_max(𝒜ᵀ𝒜)`.
pub const DEFAULT_TAU_FACTOR: f64 = 1.5;

/// Penalised least squares `min Σ_j r(x_j) + (μ/2)‖𝒜x − y₀‖²`, split as
/// `f(x) = Σ_j r(x_j)`, `h(y) = (μ/2)‖y − y₀‖²`, `𝒜x − y = 0`.
#[derive(Debug, Clone)]
pub struct ScadMcpRegressionConfig {
    pub a_meas: DMatrix<f64>,
    pub y0: DVector<f64>,
    pub mu: f64,
    pub penalty: Penalty,
    /// Prox-linear curvature; the block uses `Q = α(τI − 𝒜ᵀ𝒜)`.
    pub tau: f64,
}

impl ScadMcpRegressionConfig {
    /// Uses `τ = 1.5 · λ_max(𝒜ᵀ𝒜)`.
    pub fn new(a_meas: DMatrix<f64>, y0: DVector<f64>, mu: f64, penalty: Penalty) -> Self {
        let tau = DEFAULT_TAU_FACTOR * gram_max_eigenvalue(&a_meas);
        ScadMcpRegressionConfig { a_meas, y0, mu, penalty, tau }
    }

    /// Default penalty parameter `α = 1.1 μ`.
    pub fn default_alpha(&self) -> f64 {
        1.1 * self.mu
    }
}

/// Weak-convexity modulus of the scalar penalty (`r + (ε/2)t²` is convex).
pub fn penalty_weak_convexity(p: &Penalty) -> Option<f64> {
    match p {
        Penalty::Scad(s) => Some(1.0 / (s.theta - 1.0)),
        Penalty::Mcp(m) => Some(1.0 / m.theta),
        Penalty::L1 { .. } => None,
    }
}

pub fn build_scad_mcp_regression(cfg: &ScadMcpRegressionConfig, solver: &SolverConfig) -> Result<ProblemSpec> {
    let (m, n) = cfg.a_meas.shape();
    if cfg.y0.len() != m {
        return Err(PadmmError::Dimension(format!("y0 has length {}, expected {m}", cfg.y0.len())));
    }
    if m == 0 || n == 0 {
        return Err(PadmmError::InvalidInput("measurement matrix is empty".into()));
    }
    if !(solver.alpha > 0.0 && solver.alpha.is_finite()) {
        return Err(PadmmError::InvalidInput(format!("alpha must be positive, got {}", solver.alpha)));
    }
    let lmax = gram_max_eigenvalue(&cfg.a_meas);
    if !(cfg.tau >= lmax * (1.0 + TAU_MARGIN)) {
        return Err(PadmmError::InvalidInput(format!(
            "tau = {} is below lambda_max(A^T A)(1 + 1e-6) = {}",
            cfg.tau,
            lmax * (1.0 + TAU_MARGIN)
        )));
    }
    let a = LinearOperator::dense(cfg.a_meas.clone());
    let q = ProxLinear::proximal_matrix(&a, solver.alpha, cfg.tau);
    let oracle = ProxLinear::new(cfg.penalty, cfg.tau)?;
    let mut block = BlockSpec::new(a, q, oracle);
    if let Some(eps) = penalty_weak_convexity(&cfg.penalty) {
        block = block.with_weak_convexity(eps);
    }
    let smooth = QuadraticSmooth::least_squares(cfg.mu, &cfg.y0)?;
    ProblemSpec::new(vec![block], smooth, LinearOperator::scaled_identity(m, -1.0), DVector::zeros(m))
}
