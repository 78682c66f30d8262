//! Scalar penalties, their proximal maps, and the two matrix projections used
//! by the sparse + low-rank decomposition.
//!
//! The proximal maps are exact global minimisers of
//! `φ(t) = r(t) + (ρ/2)(t − v)²`. SCAD and MCP are nonconvex, so each piece
//! of the penalty contributes its clipped stationary point plus its
//! breakpoints as candidates and the candidate with the smallest `φ` wins.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PadmmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScadParams {
    pub lambda: f64,
    /// Shape parameter, strictly greater than 2.
    pub theta: f64,
}

impl ScadParams {
    pub fn new(lambda: f64, theta: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(PadmmError::InvalidInput(format!("SCAD lambda must be positive, got {lambda}")));
        }
        if !(theta > 2.0 && theta.is_finite()) {
            return Err(PadmmError::InvalidInput(format!("SCAD theta must exceed 2, got {theta}")));
        }
        Ok(ScadParams { lambda, theta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McpParams {
    pub lambda: f64,
    pub theta: f64,
}

impl McpParams {
    pub fn new(lambda: f64, theta: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(PadmmError::InvalidInput(format!("MCP lambda must be positive, got {lambda}")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(PadmmError::InvalidInput(format!("MCP theta must be positive, got {theta}")));
        }
        Ok(McpParams { lambda, theta })
    }
}

/// SCAD penalty.
pub fn scad_value(t: f64, p: ScadParams) -> f64 {
    let ScadParams { lambda, theta } = p;
    let a = t.abs();
    if a <= lambda {
        lambda * a
    } else if a <= theta * lambda {
        (-a * a + 2.0 * theta * lambda * a - lambda * lambda) / (2.0 * (theta - 1.0))
    } else {
        (theta + 1.0) * lambda * lambda / 2.0
    }
}

/// MCP penalty.
pub fn mcp_value(t: f64, p: McpParams) -> f64 {
    let McpParams { lambda, theta } = p;
    let a = t.abs();
    if a <= theta * lambda {
        lambda * a - a * a / (2.0 * theta)
    } else {
        theta * lambda * lambda / 2.0
    }
}

pub fn soft_threshold(v: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    v.signum() * (v.abs() - t).max(0.0)
}

pub fn soft_threshold_vec(v: &DVector<f64>, t: f64) -> DVector<f64> {
    v.map(|x| soft_threshold(x, t))
}

/// Pick the minimiser of `r(t) + (ρ/2)(t − a)²` over nonnegative candidates.
/// Ties go to the candidate listed first.
fn best_candidate(candidates: &[f64], a: f64, rho: f64, penalty: impl Fn(f64) -> f64) -> f64 {
    let mut best = 0.0;
    let mut best_val = f64::INFINITY;
    for &t in candidates {
        let val = penalty(t) + 0.5 * rho * (t - a) * (t - a);
        if val < best_val {
            best_val = val;
            best = t;
        }
    }
    best
}

/// `argmin_t scad(t) + (ρ/2)(t − v)²`.
pub fn scad_prox(v: f64, p: ScadParams, rho: f64) -> f64 {
    debug_assert!(rho > 0.0);
    let ScadParams { lambda, theta } = p;
    let a = v.abs();
    let hi = theta * lambda;
    let mut cand = [0.0; 7];
    cand[0] = 0.0;
    cand[1] = (a - lambda / rho).clamp(0.0, lambda);
    // Middle piece: (−t + θλ)/(θ−1) + ρ(t − a) = 0.
    let denom = rho * (theta - 1.0) - 1.0;
    cand[2] = if denom != 0.0 {
        ((rho * a * (theta - 1.0) - hi) / denom).clamp(lambda, hi)
    } else {
        lambda
    };
    cand[3] = a.max(hi);
    cand[4] = lambda;
    cand[5] = hi;
    cand[6] = a.min(hi).max(0.0);
    let t = best_candidate(&cand, a, rho, |t| scad_value(t, p));
    v.signum() * t
}

/// `argmin_t mcp(t) + (ρ/2)(t − v)²`. When `ρθ ≤ 1` the minimiser need not be
/// unique; the first optimal candidate in `[0, stationary, θλ, v]` order wins.
pub fn mcp_prox(v: f64, p: McpParams, rho: f64) -> f64 {
    debug_assert!(rho > 0.0);
    let McpParams { lambda, theta } = p;
    let a = v.abs();
    let hi = theta * lambda;
    let denom = rho - 1.0 / theta;
    let stationary = if denom != 0.0 { ((rho * a - lambda) / denom).clamp(0.0, hi) } else { 0.0 };
    let cand = [0.0, stationary, hi, a.max(hi)];
    let t = best_candidate(&cand, a, rho, |t| mcp_value(t, p));
    v.signum() * t
}

/// A separable penalty `Σ_j r(x_j)` with an exact scalar proximal map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Penalty {
    Scad(ScadParams),
    Mcp(McpParams),
    /// `λ|t|`.
    L1 { lambda: f64 },
}

impl Penalty {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Penalty::Scad(p) => scad_value(t, p),
            Penalty::Mcp(p) => mcp_value(t, p),
            Penalty::L1 { lambda } => lambda * t.abs(),
        }
    }

    pub fn prox(&self, v: f64, rho: f64) -> f64 {
        match *self {
            Penalty::Scad(p) => scad_prox(v, p, rho),
            Penalty::Mcp(p) => mcp_prox(v, p, rho),
            Penalty::L1 { lambda } => soft_threshold(v, lambda / rho),
        }
    }

    pub fn total(&self, x: &DVector<f64>) -> f64 {
        x.iter().map(|&t| self.value(t)).sum()
    }

    pub fn prox_vec(&self, v: &DVector<f64>, rho: f64) -> DVector<f64> {
        v.map(|t| self.prox(t, rho))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Penalty::Scad(p) => ScadParams::new(p.lambda, p.theta).map(|_| ()),
            Penalty::Mcp(p) => McpParams::new(p.lambda, p.theta).map(|_| ()),
            Penalty::L1 { lambda } if lambda >= 0.0 && lambda.is_finite() => Ok(()),
            Penalty::L1 { lambda } => {
                Err(PadmmError::InvalidInput(format!("L1 weight must be nonnegative, got {lambda}")))
            }
        }
    }
}

/// Best rank-≤`r` approximation in Frobenius norm. Matrices whose numerical
/// rank is already at most `r` are returned unchanged.
pub fn project_rank(x: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let (m, n) = x.shape();
    if r > m.min(n) {
        return Err(PadmmError::InvalidInput(format!("rank bound {r} exceeds min({m}, {n})")));
    }
    if r == 0 {
        return Ok(DMatrix::zeros(m, n));
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = m.max(n) as f64 * f64::EPSILON * smax;
    if svd.singular_values.iter().filter(|&&s| s > tol).count() <= r {
        return Ok(x.clone());
    }
    // nalgebra does not promise sorted singular values.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut out = DMatrix::zeros(m, n);
    for &i in order.iter().take(r) {
        let s = svd.singular_values[i];
        out += (u.column(i) * s) * vt.row(i);
    }
    Ok(out)
}

/// Keep the `s` entries of largest magnitude (row-major order breaks ties,
/// first index wins) and zero the rest. Kept entries are copied bitwise.
pub fn project_cardinality(x: &DMatrix<f64>, s: usize) -> DMatrix<f64> {
    let (m, n) = x.shape();
    if s >= m * n {
        return x.clone();
    }
    let mut idx: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    // Stable sort keeps row-major order among equal magnitudes.
    idx.sort_by(|a, b| x[*b].abs().total_cmp(&x[*a].abs()));
    let mut out = DMatrix::zeros(m, n);
    for &ij in idx.iter().take(s) {
        out[ij] = x[ij];
    }
    out
}

/// Vector form of [`project_cardinality`].
pub fn project_cardinality_vec(x: &DVector<f64>, s: usize) -> DVector<f64> {
    let mat = DMatrix::from_column_slice(1, x.len(), x.as_slice());
    let out = project_cardinality(&mat, s);
    DVector::from_column_slice(out.as_slice())
}
