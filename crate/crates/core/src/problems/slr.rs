//! Sparse plus low-rank plus smooth decomposition `X₁ + X₂ + Y = 𝒜`.
//!
//! Matrices are flattened column-major. `X₁` carries a rank bound, `X₂` a
//! cardinality bound, and `Y` the column-difference energy
//! `h(Y) = α₃ Σ_{j=1}^{n−1} ‖Y_{:,j+1} − Y_{:,j}‖²`.

use nalgebra::{DMatrix, DVector};

use crate::error::{OracleError, PadmmError, Result};
use crate::linalg::{solve_spd, solve_tridiagonal, LinearOperator};
use crate::model::{BlockOracle, BlockSpec, BlockSubproblem, ProblemSpec, SmoothTerm, SolverConfig, YSubproblem};
use crate::prox::{project_cardinality, project_rank};

/// Default steps are this fraction of their upper bounds `1/(α + q)`.
pub const STEP_FRACTION: f64 = 0.99;

#[derive(Debug, Clone)]
pub struct SlrConfig {
    pub a_data: DMatrix<f64>,
    /// Rank bound on `X₁`.
    pub r: usize,
    /// Cardinality bound on `X₂`.
    pub s: usize,
    /// Weights on the two indicator terms. Scaling an indicator does not
    /// change it, so these only appear in reports.
    pub alpha1: f64,
    pub alpha2: f64,
    /// Weight of the smooth term.
    pub alpha3: f64,
    pub q1: f64,
    pub q2: f64,
    /// `X₁` step; `None` means `0.99/(α + q₁)`.
    pub lambda_step: Option<f64>,
    /// `X₂` step; `None` means `0.99/(α + q₂)`.
    pub gamma_step: Option<f64>,
    /// Replace the projected-gradient updates by the exact block minimisers
    /// `proj((q X^k − α·shift)/(α + q))`.
    pub exact_prox: bool,
}

impl SlrConfig {
    pub fn new(a_data: DMatrix<f64>, r: usize, s: usize, alpha3: f64) -> Self {
        SlrConfig {
            a_data,
            r,
            s,
            alpha1: 1.0,
            alpha2: 1.0,
            alpha3,
            q1: 1.0,
            q2: 1.0,
            lambda_step: None,
            gamma_step: None,
            exact_prox: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Constraint {
    Rank(usize),
    Cardinality(usize),
}

/// Block oracle for one of the two constrained matrix blocks.
#[derive(Debug, Clone)]
pub struct SlrBlock {
    rows: usize,
    cols: usize,
    constraint: Constraint,
    /// `None` selects the exact minimiser.
    step: Option<f64>,
}

impl SlrBlock {
    fn project(&self, v: &DVector<f64>) -> std::result::Result<DVector<f64>, OracleError> {
        let mat = DMatrix::from_column_slice(self.rows, self.cols, v.as_slice());
        let out = match self.constraint {
            Constraint::Rank(r) => project_rank(&mat, r).map_err(|e| OracleError::new(e.to_string()))?,
            Constraint::Cardinality(s) => project_cardinality(&mat, s),
        };
        Ok(DVector::from_column_slice(out.as_slice()))
    }

    fn feasible(&self, x: &DVector<f64>) -> bool {
        let mat = DMatrix::from_column_slice(self.rows, self.cols, x.as_slice());
        match self.constraint {
            Constraint::Rank(r) => crate::linalg::numerical_rank(&mat) <= r,
            Constraint::Cardinality(s) => x.iter().filter(|v| **v != 0.0).count() <= s,
        }
    }
}

/// Scale of a block operator known to be a multiple of the identity.
fn identity_scale(op: &LinearOperator) -> Option<f64> {
    match op {
        LinearOperator::ScaledIdentity { scale, .. } => Some(*scale),
        LinearOperator::Dense(_) => None,
    }
}

impl BlockOracle for SlrBlock {
    fn value(&self, x: &DVector<f64>) -> f64 {
        if self.feasible(x) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn minimize(&self, sub: &BlockSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError> {
        let (Some(1.0), Some(q)) = (identity_scale(sub.a), identity_scale(sub.q)) else {
            return Err(OracleError::new("matrix block expects A = I and Q = qI"));
        };
        let alpha = sub.alpha;
        let point = match self.step {
            // X^k − αλ(X^k + shift)
            Some(step) => sub.x_prev - (sub.x_prev + sub.shift) * (alpha * step),
            None => (sub.x_prev * q - sub.shift * alpha) / (alpha + q),
        };
        self.project(&point)
    }

    fn is_exact(&self) -> bool {
        self.step.is_none()
    }
}

/// `h(Y) = α₃ Σ_rows ‖D y_row‖²` with `D` the first-difference operator
/// along the columns. `L_h = 8α₃` bounds `2α₃ λ_max(DᵀD)`.
#[derive(Debug, Clone)]
pub struct ColumnSmoothness {
    rows: usize,
    cols: usize,
    alpha3: f64,
}

impl ColumnSmoothness {
    pub fn new(rows: usize, cols: usize, alpha3: f64) -> Result<Self> {
        if !(alpha3 > 0.0 && alpha3.is_finite()) {
            return Err(PadmmError::InvalidInput(format!("alpha3 must be positive, got {alpha3}")));
        }
        Ok(ColumnSmoothness { rows, cols, alpha3 })
    }

    fn at(&self, y: &DVector<f64>, i: usize, j: usize) -> f64 {
        y[i + j * self.rows]
    }

    /// Dense Hessian `2α₃ (DᵀD ⊗ I_rows)` in column-major flattening.
    fn hessian(&self) -> DMatrix<f64> {
        let (m, n) = (self.rows, self.cols);
        let mut h = DMatrix::zeros(m * n, m * n);
        for j in 0..n.saturating_sub(1) {
            for i in 0..m {
                let (a, b) = (i + j * m, i + (j + 1) * m);
                let w = 2.0 * self.alpha3;
                h[(a, a)] += w;
                h[(b, b)] += w;
                h[(a, b)] -= w;
                h[(b, a)] -= w;
            }
        }
        h
    }
}

impl SmoothTerm for ColumnSmoothness {
    fn value(&self, y: &DVector<f64>) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.cols.saturating_sub(1) {
            for i in 0..self.rows {
                let d = self.at(y, i, j + 1) - self.at(y, i, j);
                acc += d * d;
            }
        }
        self.alpha3 * acc
    }

    fn gradient(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(y.len());
        for j in 0..self.cols.saturating_sub(1) {
            for i in 0..self.rows {
                let d = 2.0 * self.alpha3 * (self.at(y, i, j + 1) - self.at(y, i, j));
                g[i + (j + 1) * self.rows] += d;
                g[i + j * self.rows] -= d;
            }
        }
        g
    }

    fn lipschitz(&self) -> f64 {
        8.0 * self.alpha3
    }

    /// `(2α₃DᵀD + αb² + p) y_row = −αb·shift_row + p·y_prev_row` per row when
    /// `B = bI` and `P = pI`; a dense solve otherwise.
    fn minimize(&self, sub: &YSubproblem<'_>) -> std::result::Result<DVector<f64>, OracleError> {
        let (m, n) = (self.rows, self.cols);
        let alpha = sub.alpha;
        if let (Some(b), Some(p)) = (identity_scale(sub.b), identity_scale(sub.p)) {
            let base = alpha * b * b + p;
            let w = 2.0 * self.alpha3;
            let mut diag = vec![base; n];
            if n > 1 {
                for (j, d) in diag.iter_mut().enumerate() {
                    *d += if j == 0 || j == n - 1 { w } else { 2.0 * w };
                }
            }
            let off = vec![-w; n.saturating_sub(1)];
            let mut out = DVector::zeros(m * n);
            let mut rhs = vec![0.0; n];
            for i in 0..m {
                for (j, v) in rhs.iter_mut().enumerate() {
                    let idx = i + j * m;
                    *v = -alpha * b * sub.shift[idx] + p * sub.y_prev[idx];
                }
                let sol = solve_tridiagonal(&off, &diag, &off, &rhs);
                for (j, v) in sol.into_iter().enumerate() {
                    out[i + j * m] = v;
                }
            }
            if out.iter().all(|v| v.is_finite()) {
                return Ok(out);
            }
            return Err(OracleError::new("tridiagonal y system is singular"));
        }
        let sys = self.hessian() + sub.b.gram().scale(alpha).to_dense() + sub.p.to_dense();
        let rhs = -sub.b.apply_transpose(sub.shift) * alpha + sub.p.apply(sub.y_prev);
        solve_spd(&sys, &rhs).ok_or_else(|| OracleError::new("y system is singular"))
    }
}

pub fn build_slr_decomposition(cfg: &SlrConfig, solver: &SolverConfig) -> Result<ProblemSpec> {
    let (m, n) = cfg.a_data.shape();
    if m == 0 || n == 0 {
        return Err(PadmmError::InvalidInput("data matrix is empty".into()));
    }
    if cfg.r > m.min(n) {
        return Err(PadmmError::InvalidInput(format!("rank bound {} exceeds min({m}, {n})", cfg.r)));
    }
    if cfg.s > m * n {
        return Err(PadmmError::InvalidInput(format!("cardinality bound {} exceeds {}", cfg.s, m * n)));
    }
    for (name, v) in [("alpha1", cfg.alpha1), ("alpha2", cfg.alpha2), ("q1", cfg.q1), ("q2", cfg.q2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(PadmmError::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    let alpha = solver.alpha;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(PadmmError::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    let step = |given: Option<f64>, q: f64, name: &str| -> Result<Option<f64>> {
        if cfg.exact_prox {
            return Ok(None);
        }
        let bound = 1.0 / (alpha + q);
        let s = given.unwrap_or(STEP_FRACTION * bound);
        if !(s > 0.0 && s < bound) {
            return Err(PadmmError::InvalidInput(format!("{name} = {s} must lie in (0, {bound})")));
        }
        Ok(Some(s))
    };
    let lambda = step(cfg.lambda_step, cfg.q1, "lambda_step")?;
    let gamma = step(cfg.gamma_step, cfg.q2, "gamma_step")?;

    let dim = m * n;
    let x1 = SlrBlock { rows: m, cols: n, constraint: Constraint::Rank(cfg.r), step: lambda };
    let x2 = SlrBlock { rows: m, cols: n, constraint: Constraint::Cardinality(cfg.s), step: gamma };
    let blocks = vec![
        BlockSpec::new(LinearOperator::identity(dim), LinearOperator::scaled_identity(dim, cfg.q1), x1),
        BlockSpec::new(LinearOperator::identity(dim), LinearOperator::scaled_identity(dim, cfg.q2), x2),
    ];
    let smooth = ColumnSmoothness::new(m, n, cfg.alpha3)?;
    let offset = -DVector::from_column_slice(cfg.a_data.as_slice());
    ProblemSpec::new(blocks, smooth, LinearOperator::identity(dim), offset)
}

/// Reshape a flattened block back to an `rows × cols` matrix.
pub fn unflatten(v: &DVector<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

pub fn flatten(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_dense_hessian() {
        let h = ColumnSmoothness::new(3, 4, 0.7).unwrap();
        let y = DVector::from_fn(12, |i, _| (i as f64 * 0.37).sin());
        let g = h.gradient(&y);
        let gd = h.hessian() * &y;
        assert!((g - &gd).norm() < 1e-12);
        assert!((h.value(&y) - 0.5 * y.dot(&gd)).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_bounds_hessian() {
        let h = ColumnSmoothness::new(2, 9, 1.3).unwrap();
        let lmax = LinearOperator::dense(h.hessian()).max_eigenvalue();
        assert!(lmax <= h.lipschitz());
    }
}
