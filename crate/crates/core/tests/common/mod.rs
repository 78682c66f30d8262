#![allow(dead_code)]

use padmm::problems::{build_scad_mcp_regression, gen_sparse_regression, ScadMcpRegressionConfig};
use padmm::{nalgebra, LinearOperator, McpParams, Penalty, ProblemSpec, ScadParams, SolverConfig};

pub const M: usize = 20;
pub const N: usize = 50;
pub const SEED: u64 = 42;
pub const MU: f64 = 1.0;
/// `α = 4μ` with `β = 1`, `ε₀ = 1.5` and `P = 0` gives `λ_min(D̄) = 1.5μ`.
pub const ALPHA: f64 = 4.0 * MU;
/// `τ` relative to `λ_max(𝒜ᵀ𝒜)`.
pub const TAU_FACTOR: f64 = 1.01;

pub fn scad() -> Penalty {
    Penalty::Scad(ScadParams::new(0.5, 3.7).unwrap())
}

pub fn mcp() -> Penalty {
    Penalty::Mcp(McpParams::new(0.5, 3.7).unwrap())
}

pub fn regression_solver(beta: f64) -> SolverConfig {
    let mut s = SolverConfig::new(ALPHA, beta, LinearOperator::zeros(M));
    s.max_iter = 5000;
    // ‖d‖ ≤ ρ·(step sum) with ρ ≈ 34 on this instance, so the step tolerance
    // sits well below the 1e-5 stationarity target. The longer run also puts
    // most of the trace in the asymptotic regime the rate fitter looks at.
    s.tol_step = 1e-8;
    s
}

/// The desk-scale regression instance: 20×50 Gaussian design, 5-sparse truth,
/// noise 0.01, seed 42.
pub fn regression_problem(penalty: Penalty, solver: &SolverConfig) -> ProblemSpec {
    let inst = gen_sparse_regression(M, N, 5, 0.01, SEED).unwrap();
    let mut cfg = ScadMcpRegressionConfig::new(inst.a, inst.y0, MU, penalty);
    cfg.tau = TAU_FACTOR * padmm::oracles::gram_max_eigenvalue(&cfg.a_meas);
    build_scad_mcp_regression(&cfg, solver).unwrap()
}

/// `min_t r(t) + (ρ/2)(t − v)²` over the grid `{i·step}` covering
/// `[min(0, v) − 1, max(0, v) + 1]`. The grid contains 0, where the penalties
/// have their kink. Returns `(argmin, value)`.
pub fn grid_prox(r: impl Fn(f64) -> f64, v: f64, rho: f64, step: f64) -> (f64, f64) {
    let lo = ((v.min(0.0) - 1.0) / step).floor() as i64;
    let hi = ((v.max(0.0) + 1.0) / step).ceil() as i64;
    let mut best = (0.0, f64::INFINITY);
    for i in lo..=hi {
        let t = i as f64 * step;
        let val = r(t) + 0.5 * rho * (t - v) * (t - v);
        if val < best.1 {
            best = (t, val);
        }
    }
    best
}

pub fn dvec(v: &[f64]) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_column_slice(v)
}

/// SCAD written out piece by piece, independent of the library.
pub fn scad_ref(t: f64, lambda: f64, theta: f64) -> f64 {
    let a = t.abs();
    if a > theta * lambda {
        return 0.5 * (theta + 1.0) * lambda * lambda;
    }
    if a > lambda {
        return (2.0 * theta * lambda * a - a * a - lambda * lambda) / (2.0 * theta - 2.0);
    }
    lambda * a
}

/// MCP written out piece by piece, independent of the library.
pub fn mcp_ref(t: f64, lambda: f64, theta: f64) -> f64 {
    let a = t.abs();
    if a > theta * lambda {
        0.5 * theta * lambda * lambda
    } else {
        lambda * a - 0.5 * a * a / theta
    }
}
