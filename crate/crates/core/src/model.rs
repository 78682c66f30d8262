//! Problem and solver data model.
//!
//! A problem is `min Σ f_i(x_i) + h(y)  s.t.  Σ A_i x_i + B y + b = 0` with
//! `p ≥ 1` nonsmooth blocks and one smooth block. Every `f_i` is reached only
//! through a [`BlockOracle`] (value + exact subproblem minimiser) and `h`
//! through a [`SmoothTerm`].

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{OracleError, PadmmError, Result};
use crate::linalg::LinearOperator;

/// The `x_i` subproblem handed to a block oracle:
///
/// `argmin_x f_i(x) + (α/2)‖A_i x + shift‖² + ½‖x − x_prev‖²_{Q_i}`
///
/// where `shift = Σ_{j≠i} A_j x_j + B y + b + z/α` is built from the latest
/// blocks before `i`, the stale blocks after it, and `(y^k, z^k)`.
pub struct BlockSubproblem<'a> {
    pub index: usize,
    pub a: &'a LinearOperator,
    pub q: &'a LinearOperator,
    pub alpha: f64,
    pub shift: &'a DVector<f64>,
    pub x_prev: &'a DVector<f64>,
}

impl BlockSubproblem<'_> {
    /// The quadratic part of the subproblem objective (everything but `f_i`).
    pub fn smooth_part(&self, x: &DVector<f64>) -> f64 {
        let r = self.a.apply(x) + self.shift;
        let dx = x - self.x_prev;
        0.5 * self.alpha * r.norm_squared() + 0.5 * self.q.quad_form(&dx)
    }
}

/// The `y` subproblem: `argmin_y h(y) + (α/2)‖B y + shift‖² + ½‖y − y_prev‖²_P`
/// with `shift = A x^{k+1} + b + z^k/α`.
pub struct YSubproblem<'a> {
    pub b: &'a LinearOperator,
    pub p: &'a LinearOperator,
    pub alpha: f64,
    pub shift: &'a DVector<f64>,
    pub y_prev: &'a DVector<f64>,
}

impl YSubproblem<'_> {
    pub fn smooth_part(&self, y: &DVector<f64>) -> f64 {
        let r = self.b.apply(y) + self.shift;
        let dy = y - self.y_prev;
        0.5 * self.alpha * r.norm_squared() + 0.5 * self.p.quad_form(&dy)
    }
}

/// A nonsmooth block `f_i` together with its subproblem solver.
pub trait BlockOracle: Send + Sync {
    /// `f_i(x)`; `f64::INFINITY` outside the domain.
    fn value(&self, x: &DVector<f64>) -> f64;

    /// Minimiser of the block subproblem.
    fn minimize(&self, sub: &BlockSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError>;

    /// Whether [`minimize`](Self::minimize) returns an exact global minimiser.
    /// The per-update and sufficient-decrease bounds only apply to exact oracles.
    fn is_exact(&self) -> bool {
        true
    }
}

/// The smooth block `h` with Lipschitz gradient.
pub trait SmoothTerm: Send + Sync {
    fn value(&self, y: &DVector<f64>) -> f64;
    fn gradient(&self, y: &DVector<f64>) -> DVector<f64>;
    /// Lipschitz constant `L_h` of the gradient.
    fn lipschitz(&self) -> f64;
    /// Exact minimiser of the `y` subproblem.
    fn minimize(&self, sub: &YSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError>;
}

pub struct BlockSpec {
    pub a: LinearOperator,
    pub q: LinearOperator,
    pub oracle: Box<dyn BlockOracle>,
    /// Weak-convexity modulus `ε_i` of `f_i`, when known.
    pub weak_convexity: Option<f64>,
}

impl BlockSpec {
    pub fn new(a: LinearOperator, q: LinearOperator, oracle: impl BlockOracle + 'static) -> Self {
        BlockSpec { a, q, oracle: Box::new(oracle), weak_convexity: None }
    }

    pub fn with_weak_convexity(mut self, eps: f64) -> Self {
        self.weak_convexity = Some(eps);
        self
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }
}

impl fmt::Debug for BlockSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockSpec")
            .field("rows", &self.a.nrows())
            .field("dim", &self.dim())
            .field("exact", &self.oracle.is_exact())
            .field("weak_convexity", &self.weak_convexity)
            .finish()
    }
}

pub struct ProblemSpec {
    blocks: Vec<BlockSpec>,
    smooth: Box<dyn SmoothTerm>,
    coupling: LinearOperator,
    offset: DVector<f64>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("blocks", &self.blocks)
            .field("m", &self.m())
            .field("q", &self.y_dim())
            .field("lipschitz", &self.smooth.lipschitz())
            .finish()
    }
}

impl ProblemSpec {
    pub fn new(
        blocks: Vec<BlockSpec>,
        smooth: impl SmoothTerm + 'static,
        coupling: LinearOperator,
        offset: DVector<f64>,
    ) -> Result<Self> {
        let spec = ProblemSpec { blocks, smooth: Box::new(smooth), coupling, offset };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let m = self.offset.len();
        if self.blocks.is_empty() {
            return Err(PadmmError::InvalidInput("at least one nonsmooth block is required".into()));
        }
        if m == 0 {
            return Err(PadmmError::InvalidInput("constraint dimension m must be positive".into()));
        }
        if self.coupling.nrows() != m {
            return Err(PadmmError::Dimension(format!(
                "B has {} rows but b has length {m}",
                self.coupling.nrows()
            )));
        }
        if self.coupling.ncols() == 0 {
            return Err(PadmmError::InvalidInput("y dimension q must be positive".into()));
        }
        for (i, blk) in self.blocks.iter().enumerate() {
            if blk.a.nrows() != m {
                return Err(PadmmError::Dimension(format!(
                    "A_{} has {} rows, expected {m}",
                    i + 1,
                    blk.a.nrows()
                )));
            }
            if blk.dim() == 0 {
                return Err(PadmmError::InvalidInput(format!("block {} has dimension 0", i + 1)));
            }
            if blk.q.nrows() != blk.dim() || blk.q.ncols() != blk.dim() {
                return Err(PadmmError::Dimension(format!(
                    "Q_{} is {}x{}, expected {n}x{n}",
                    i + 1,
                    blk.q.nrows(),
                    blk.q.ncols(),
                    n = blk.dim()
                )));
            }
            if !blk.q.is_psd() {
                return Err(PadmmError::InvalidInput(format!(
                    "Q_{} is not symmetric positive semidefinite",
                    i + 1
                )));
            }
            if let Some(eps) = blk.weak_convexity {
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(PadmmError::InvalidInput(format!(
                        "weak-convexity modulus of block {} must be positive",
                        i + 1
                    )));
                }
            }
        }
        let lh = self.smooth.lipschitz();
        if !(lh > 0.0 && lh.is_finite()) {
            return Err(PadmmError::InvalidInput(format!("L_h must be positive and finite, got {lh}")));
        }
        Ok(())
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn smooth(&self) -> &dyn SmoothTerm {
        self.smooth.as_ref()
    }

    /// `B`.
    pub fn coupling(&self) -> &LinearOperator {
        &self.coupling
    }

    /// `b`.
    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn m(&self) -> usize {
        self.offset.len()
    }

    pub fn y_dim(&self) -> usize {
        self.coupling.ncols()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(BlockSpec::dim).collect()
    }

    pub(crate) fn check_point(&self, x: &[DVector<f64>], y: &DVector<f64>, z: &DVector<f64>) -> Result<()> {
        if x.len() != self.blocks.len() {
            return Err(PadmmError::Dimension(format!(
                "expected {} x-blocks, got {}",
                self.blocks.len(),
                x.len()
            )));
        }
        for (i, (xi, blk)) in x.iter().zip(&self.blocks).enumerate() {
            if xi.len() != blk.dim() {
                return Err(PadmmError::Dimension(format!(
                    "x_{} has length {}, expected {}",
                    i + 1,
                    xi.len(),
                    blk.dim()
                )));
            }
        }
        if y.len() != self.y_dim() {
            return Err(PadmmError::Dimension(format!("y has length {}, expected {}", y.len(), self.y_dim())));
        }
        if z.len() != self.m() {
            return Err(PadmmError::Dimension(format!("z has length {}, expected {}", z.len(), self.m())));
        }
        Ok(())
    }

    /// `Σ A_i x_i`.
    pub fn a_times_x(&self, x: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m());
        for (blk, xi) in self.blocks.iter().zip(x) {
            out += blk.a.apply(xi);
        }
        out
    }

    /// `Σ A_i x_i + B y + b`.
    pub fn residual(&self, x: &[DVector<f64>], y: &DVector<f64>) -> DVector<f64> {
        self.a_times_x(x) + self.coupling.apply(y) + &self.offset
    }

    /// `Σ f_i(x_i) + h(y)`.
    pub fn objective(&self, x: &[DVector<f64>], y: &DVector<f64>) -> f64 {
        let f: f64 = self.blocks.iter().zip(x).map(|(b, xi)| b.oracle.value(xi)).sum();
        f + self.smooth.value(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckLevel {
    Off,
    /// Checks that need only per-iteration scalars already computed.
    #[default]
    Cheap,
    /// Also records intermediate Lagrangian values within each iteration and
    /// the dual-bound quantities.
    Full,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Penalty `α > 0`.
    pub alpha: f64,
    /// Dual step size `β ∈ (0, 2)`.
    pub beta: f64,
    /// Proximal matrix for `y`.
    pub p: LinearOperator,
    /// `ε₀ > 1` in the modified Lagrangian.
    pub epsilon0: f64,
    pub max_iter: usize,
    pub tol_residual: f64,
    pub tol_step: f64,
    pub check_level: CheckLevel,
}

impl SolverConfig {
    pub fn new(alpha: f64, beta: f64, p: LinearOperator) -> Self {
        SolverConfig {
            alpha,
            beta,
            p,
            epsilon0: 1.5,
            max_iter: 5000,
            tol_residual: 1e-6,
            tol_step: 1e-6,
            check_level: CheckLevel::Cheap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(PadmmError::InvalidInput(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 2.0) {
            return Err(PadmmError::InvalidInput(format!("beta must lie in (0, 2), got {}", self.beta)));
        }
        if !(self.epsilon0 > 1.0 && self.epsilon0.is_finite()) {
            return Err(PadmmError::InvalidInput(format!("epsilon0 must exceed 1, got {}", self.epsilon0)));
        }
        if self.max_iter == 0 {
            return Err(PadmmError::InvalidInput("max_iter must be positive".into()));
        }
        if !(self.tol_residual > 0.0) || !(self.tol_step > 0.0) {
            return Err(PadmmError::InvalidInput("tolerances must be positive".into()));
        }
        if !self.p.is_psd() {
            return Err(PadmmError::InvalidInput("P is not symmetric positive semidefinite".into()));
        }
        Ok(())
    }

    pub(crate) fn validate_for(&self, problem: &ProblemSpec) -> Result<()> {
        self.validate()?;
        let q = problem.y_dim();
        if self.p.nrows() != q || self.p.ncols() != q {
            return Err(PadmmError::Dimension(format!(
                "P is {}x{}, expected {q}x{q}",
                self.p.nrows(),
                self.p.ncols()
            )));
        }
        Ok(())
    }
}

/// Current iterate plus the previous `y`, `z` needed by the modified Lagrangian.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub x: Vec<DVector<f64>>,
    pub y: DVector<f64>,
    pub z: DVector<f64>,
    pub y_prev: DVector<f64>,
    pub z_prev: DVector<f64>,
    pub k: usize,
}

impl Iterate {
    /// All-zero start with `y_prev = y`, `z_prev = z`.
    pub fn zeros(problem: &ProblemSpec) -> Self {
        let x = problem.block_dims().into_iter().map(DVector::zeros).collect();
        let y = DVector::zeros(problem.y_dim());
        let z = DVector::zeros(problem.m());
        Iterate::from_point(x, y, z)
    }

    pub fn from_point(x: Vec<DVector<f64>>, y: DVector<f64>, z: DVector<f64>) -> Self {
        Iterate { y_prev: y.clone(), z_prev: z.clone(), x, y, z, k: 0 }
    }

    pub fn check_dims(&self, problem: &ProblemSpec) -> Result<()> {
        problem.check_point(&self.x, &self.y, &self.z)?;
        if self.y_prev.len() != self.y.len() || self.z_prev.len() != self.z.len() {
            return Err(PadmmError::Dimension("previous y/z have the wrong length".into()));
        }
        Ok(())
    }
}
