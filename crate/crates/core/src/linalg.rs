//! Small linear-operator layer over `nalgebra`.
//!
//! Both worked applications use `±I` for most of their coupling and proximal
//! matrices; keeping those structured avoids dense eigendecompositions of
//! 900×900 identities when computing the theoretical constants.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative threshold below which eigenvalues count as zero.
pub const ZERO_EIGEN_RTOL: f64 = 1e-10;

/// Relative tolerance for the positive-semidefinite test on proximal matrices.
pub const PSD_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum LinearOperator {
    /// `scale · I_dim`; `scale = 0` is the zero matrix.
    ScaledIdentity { dim: usize, scale: f64 },
    Dense(DMatrix<f64>),
}

impl LinearOperator {
    pub fn identity(dim: usize) -> Self {
        LinearOperator::ScaledIdentity { dim, scale: 1.0 }
    }

    pub fn zeros(dim: usize) -> Self {
        LinearOperator::ScaledIdentity { dim, scale: 0.0 }
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        LinearOperator::ScaledIdentity { dim, scale }
    }

    pub fn dense(m: DMatrix<f64>) -> Self {
        LinearOperator::Dense(m)
    }

    pub fn nrows(&self) -> usize {
        match self {
            LinearOperator::ScaledIdentity { dim, .. } => *dim,
            LinearOperator::Dense(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            LinearOperator::ScaledIdentity { dim, .. } => *dim,
            LinearOperator::Dense(m) => m.ncols(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            LinearOperator::ScaledIdentity { scale, .. } => *scale == 0.0,
            LinearOperator::Dense(m) => m.iter().all(|v| *v == 0.0),
        }
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            LinearOperator::ScaledIdentity { scale, .. } => x * *scale,
            LinearOperator::Dense(m) => m * x,
        }
    }

    pub fn apply_transpose(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            LinearOperator::ScaledIdentity { scale, .. } => x * *scale,
            LinearOperator::Dense(m) => m.tr_mul(x),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            LinearOperator::ScaledIdentity { dim, scale } => DMatrix::identity(*dim, *dim) * *scale,
            LinearOperator::Dense(m) => m.clone(),
        }
    }

    /// `AᵀA`.
    pub fn gram(&self) -> LinearOperator {
        match self {
            LinearOperator::ScaledIdentity { dim, scale } => {
                LinearOperator::ScaledIdentity { dim: *dim, scale: scale * scale }
            }
            LinearOperator::Dense(m) => LinearOperator::Dense(m.tr_mul(m)),
        }
    }

    pub fn scale(&self, s: f64) -> LinearOperator {
        match self {
            LinearOperator::ScaledIdentity { dim, scale } => {
                LinearOperator::ScaledIdentity { dim: *dim, scale: scale * s }
            }
            LinearOperator::Dense(m) => LinearOperator::Dense(m * s),
        }
    }

    /// Sum of two square operators of equal size.
    pub fn add(&self, other: &LinearOperator) -> LinearOperator {
        debug_assert_eq!(self.nrows(), other.nrows());
        debug_assert_eq!(self.ncols(), other.ncols());
        match (self, other) {
            (
                LinearOperator::ScaledIdentity { dim, scale: a },
                LinearOperator::ScaledIdentity { scale: b, .. },
            ) => LinearOperator::ScaledIdentity { dim: *dim, scale: a + b },
            (LinearOperator::Dense(a), LinearOperator::ScaledIdentity { scale, .. })
            | (LinearOperator::ScaledIdentity { scale, .. }, LinearOperator::Dense(a)) => {
                let mut out = a.clone();
                for i in 0..out.nrows() {
                    out[(i, i)] += scale;
                }
                LinearOperator::Dense(out)
            }
            (LinearOperator::Dense(a), LinearOperator::Dense(b)) => LinearOperator::Dense(a + b),
        }
    }

    pub fn add_identity(&self, s: f64) -> LinearOperator {
        self.add(&LinearOperator::scaled_identity(self.nrows(), s))
    }

    /// `vᵀ M v`.
    pub fn quad_form(&self, v: &DVector<f64>) -> f64 {
        match self {
            LinearOperator::ScaledIdentity { scale, .. } => scale * v.norm_squared(),
            LinearOperator::Dense(m) => v.dot(&(m * v)),
        }
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        match self {
            LinearOperator::ScaledIdentity { scale, .. } => scale.abs(),
            LinearOperator::Dense(m) => {
                if m.is_empty() {
                    0.0
                } else {
                    m.clone().singular_values().max()
                }
            }
        }
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        match self {
            LinearOperator::ScaledIdentity { dim, scale } => vec![*scale; *dim],
            LinearOperator::Dense(m) => {
                let sym = (m + m.transpose()) * 0.5;
                let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
                ev.sort_by(f64::total_cmp);
                ev
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            LinearOperator::ScaledIdentity { scale, .. } => *scale,
            LinearOperator::Dense(_) => self.symmetric_eigenvalues().first().copied().unwrap_or(0.0),
        }
    }

    pub fn max_eigenvalue(&self) -> f64 {
        match self {
            LinearOperator::ScaledIdentity { scale, .. } => *scale,
            LinearOperator::Dense(_) => self.symmetric_eigenvalues().last().copied().unwrap_or(0.0),
        }
    }

    /// Smallest eigenvalue exceeding `ZERO_EIGEN_RTOL · λ_max`, if any.
    pub fn smallest_positive_eigenvalue(&self) -> Option<f64> {
        smallest_positive(&self.symmetric_eigenvalues())
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            LinearOperator::ScaledIdentity { .. } => true,
            LinearOperator::Dense(m) => {
                if !m.is_square() {
                    return false;
                }
                let scale = m.amax().max(1.0);
                (m - m.transpose()).amax() <= 1e-12 * scale
            }
        }
    }

    /// Symmetric with smallest eigenvalue ≥ −`PSD_RTOL`·‖M‖.
    pub fn is_psd(&self) -> bool {
        if !self.is_square() || !self.is_symmetric() {
            return false;
        }
        let ev = self.symmetric_eigenvalues();
        let (Some(lo), Some(hi)) = (ev.first(), ev.last()) else {
            return true;
        };
        let norm = lo.abs().max(hi.abs());
        *lo >= -PSD_RTOL * norm
    }
}

pub(crate) fn smallest_positive(ev: &[f64]) -> Option<f64> {
    let max = ev.iter().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return None;
    }
    let floor = ZERO_EIGEN_RTOL * max;
    ev.iter().copied().filter(|&v| v > floor).min_by(f64::total_cmp)
}

/// Numerical rank: singular values above `max(m,n)·ε·σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * smax;
    sv.iter().filter(|&&s| s > tol).count()
}

/// Solve the tridiagonal system with sub-diagonal `lower`, diagonal `diag`,
/// super-diagonal `upper` (Thomas algorithm; the systems solved here are
/// strictly diagonally dominant).
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(rhs.len() == n && lower.len() + 1 == n.max(1) && upper.len() + 1 == n.max(1));
    if n == 0 {
        return Vec::new();
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { upper[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Solve a symmetric positive definite system, falling back to LU when the
/// Cholesky factorisation fails.
pub fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = m.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    m.clone().lu().solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_identity_arithmetic_stays_structured() {
        let b = LinearOperator::scaled_identity(4, -1.0);
        let g = b.gram();
        assert_eq!(g, LinearOperator::scaled_identity(4, 1.0));
        let d = LinearOperator::zeros(4).scale(2.0).add(&g.scale(3.0)).add_identity(-1.0);
        assert_eq!(d, LinearOperator::scaled_identity(4, 2.0));
        assert_eq!(d.smallest_positive_eigenvalue(), Some(2.0));
    }

    #[test]
    fn dense_eigen_and_norms() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let op = LinearOperator::dense(m);
        let ev = op.symmetric_eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        assert!((op.spectral_norm() - 3.0).abs() < 1e-12);
        assert!(op.is_psd());
        let v = DVector::from_vec(vec![1.0, -1.0]);
        assert!((op.quad_form(&v) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn psd_rejects_indefinite_and_asymmetric() {
        let indefinite = LinearOperator::dense(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.1]));
        assert!(!indefinite.is_psd());
        let asym = LinearOperator::dense(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
        assert!(!asym.is_psd());
        assert!(LinearOperator::zeros(3).is_psd());
    }

    #[test]
    fn smallest_positive_skips_numerical_zeros() {
        assert_eq!(smallest_positive(&[1e-14, 0.5, 2.0]), Some(0.5));
        assert_eq!(smallest_positive(&[0.0, 0.0]), None);
    }

    #[test]
    fn tridiagonal_matches_dense_solve() {
        let lower = [-1.0, -1.0, -1.0];
        let diag = [3.0, 4.0, 4.0, 3.0];
        let upper = [-1.0, -1.0, -1.0];
        let rhs = [1.0, 2.0, -1.0, 0.5];
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[3.0, -1.0, 0.0, 0.0, -1.0, 4.0, -1.0, 0.0, 0.0, -1.0, 4.0, -1.0, 0.0, 0.0, -1.0, 3.0],
        );
        let xd = m.lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
        for i in 0..4 {
            assert!((x[i] - xd[i]).abs() < 1e-13);
        }
        assert_eq!(solve_tridiagonal(&[], &[2.0], &[], &[4.0]), vec![2.0]);
    }

    #[test]
    fn rank_of_outer_product() {
        let u = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let v = DVector::from_vec(vec![1.0, -1.0]);
        assert_eq!(numerical_rank(&(&u * v.transpose())), 1);
        assert_eq!(numerical_rank(&DMatrix::zeros(3, 2)), 0);
    }
}
