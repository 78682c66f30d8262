//! Stock subproblem oracles.

use nalgebra::{DMatrix, DVector};

use crate::error::{OracleError, PadmmError, Result};
use crate::linalg::{solve_spd, LinearOperator};
use crate::model::{BlockOracle, BlockSubproblem, SmoothTerm, YSubproblem};
use crate::prox::Penalty;

/// Prox-linear block: with `Q = α(τI − AᵀA)` the quadratic coupling cancels and
/// the block update is the separable prox of `f` at curvature `ατ`, taken at
/// `x_prev − (1/τ) Aᵀ(A x_prev + shift)`.
#[derive(Debug, Clone)]
pub struct ProxLinear {
    penalty: Penalty,
    tau: f64,
}

impl ProxLinear {
    pub fn new(penalty: Penalty, tau: f64) -> Result<Self> {
        penalty.validate()?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(PadmmError::InvalidInput(format!("tau must be positive, got {tau}")));
        }
        Ok(ProxLinear { penalty, tau })
    }

    /// The proximal matrix `α(τI − AᵀA)` this oracle assumes.
    pub fn proximal_matrix(a: &LinearOperator, alpha: f64, tau: f64) -> LinearOperator {
        a.gram().scale(-alpha).add_identity(alpha * tau)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn penalty(&self) -> Penalty {
        self.penalty
    }

    /// The point the scalar prox is applied to.
    pub fn gradient_point(&self, sub: &BlockSubproblem<'_>) -> DVector<f64> {
        let r = sub.a.apply(sub.x_prev) + sub.shift;
        sub.x_prev - sub.a.apply_transpose(&r) / self.tau
    }
}

impl BlockOracle for ProxLinear {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.penalty.total(x)
    }

    fn minimize(&self, sub: &BlockSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError> {
        let v = self.gradient_point(sub);
        Ok(self.penalty.prox_vec(&v, sub.alpha * self.tau))
    }
}

/// `f(x) = ½ xᵀHx + gᵀx`, solved exactly by a linear system.
#[derive(Debug, Clone)]
pub struct QuadraticBlock {
    pub hessian: LinearOperator,
    pub linear: DVector<f64>,
}

impl BlockOracle for QuadraticBlock {
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.hessian.quad_form(x) + self.linear.dot(x)
    }

    fn minimize(&self, sub: &BlockSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError> {
        // (H + αAᵀA + Q) x = −g − αAᵀ shift + Q x_prev
        let sys = self.hessian.add(&sub.a.gram().scale(sub.alpha)).add(sub.q);
        let rhs = -&self.linear - sub.a.apply_transpose(sub.shift) * sub.alpha + sub.q.apply(sub.x_prev);
        solve_operator(&sys, &rhs).ok_or_else(|| OracleError::new("quadratic block system is singular"))
    }
}

type ValueFn = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;
type BlockUpdateFn =
    dyn Fn(&BlockSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError> + Send + Sync;

/// User-supplied block oracle built from closures.
pub struct FnBlock {
    value: Box<ValueFn>,
    update: Box<BlockUpdateFn>,
    exact: bool,
}

impl FnBlock {
    pub fn new(
        value: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        update: impl Fn(&BlockSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        FnBlock { value: Box::new(value), update: Box::new(update), exact: true }
    }

    pub fn inexact(mut self) -> Self {
        self.exact = false;
        self
    }
}

impl BlockOracle for FnBlock {
    fn value(&self, x: &DVector<f64>) -> f64 {
        (self.value)(x)
    }

    fn minimize(&self, sub: &BlockSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError> {
        (self.update)(sub)
    }

    fn is_exact(&self) -> bool {
        self.exact
    }
}

/// `h(y) = ½ yᵀHy + gᵀy + c` with `L_h = λ_max(H)`.
#[derive(Debug, Clone)]
pub struct QuadraticSmooth {
    hessian: LinearOperator,
    linear: DVector<f64>,
    constant: f64,
    lipschitz: f64,
}

impl QuadraticSmooth {
    pub fn new(hessian: LinearOperator, linear: DVector<f64>, constant: f64) -> Result<Self> {
        if !hessian.is_square() || hessian.nrows() != linear.len() {
            return Err(PadmmError::Dimension("Hessian and linear term sizes disagree".into()));
        }
        if !hessian.is_symmetric() {
            return Err(PadmmError::InvalidInput("Hessian must be symmetric".into()));
        }
        let ev = hessian.symmetric_eigenvalues();
        let lipschitz = ev.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        Ok(QuadraticSmooth { hessian, linear, constant, lipschitz })
    }

    /// `(μ/2)‖y − y0‖²`.
    pub fn least_squares(mu: f64, y0: &DVector<f64>) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(PadmmError::InvalidInput(format!("mu must be positive, got {mu}")));
        }
        Self::new(LinearOperator::scaled_identity(y0.len(), mu), -y0 * mu, 0.5 * mu * y0.norm_squared())
    }

    pub fn hessian(&self) -> &LinearOperator {
        &self.hessian
    }
}

impl SmoothTerm for QuadraticSmooth {
    fn value(&self, y: &DVector<f64>) -> f64 {
        0.5 * self.hessian.quad_form(y) + self.linear.dot(y) + self.constant
    }

    fn gradient(&self, y: &DVector<f64>) -> DVector<f64> {
        self.hessian.apply(y) + &self.linear
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn minimize(&self, sub: &YSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError> {
        // (H + αBᵀB + P) y = −g − αBᵀ shift + P y_prev
        let sys = self.hessian.add(&sub.b.gram().scale(sub.alpha)).add(sub.p);
        let rhs = -&self.linear - sub.b.apply_transpose(sub.shift) * sub.alpha + sub.p.apply(sub.y_prev);
        solve_operator(&sys, &rhs).ok_or_else(|| OracleError::new("y-subproblem system is singular"))
    }
}

type GradFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type YUpdateFn = dyn Fn(&YSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError> + Send + Sync;

/// User-supplied smooth term built from closures.
pub struct FnSmooth {
    value: Box<ValueFn>,
    gradient: Box<GradFn>,
    lipschitz: f64,
    update: Box<YUpdateFn>,
}

impl FnSmooth {
    pub fn new(
        value: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        lipschitz: f64,
        update: impl Fn(&YSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError> + Send + Sync + 'static,
    ) -> Self {
        FnSmooth { value: Box::new(value), gradient: Box::new(gradient), lipschitz, update: Box::new(update) }
    }
}

impl SmoothTerm for FnSmooth {
    fn value(&self, y: &DVector<f64>) -> f64 {
        (self.value)(y)
    }

    fn gradient(&self, y: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(y)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn minimize(&self, sub: &YSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError> {
        (self.update)(sub)
    }
}

fn solve_operator(sys: &LinearOperator, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    match sys {
        LinearOperator::ScaledIdentity { scale, .. } if *scale != 0.0 => Some(rhs / *scale),
        LinearOperator::ScaledIdentity { .. } => None,
        LinearOperator::Dense(m) => solve_spd(m, rhs),
    }
}

/// Largest eigenvalue of `AᵀA`, i.e. `‖A‖²`.
pub fn gram_max_eigenvalue(a: &DMatrix<f64>) -> f64 {
    let n = LinearOperator::dense(a.clone()).spectral_norm();
    n * n
}
