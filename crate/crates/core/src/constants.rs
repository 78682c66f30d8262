//! Theoretical constants behind the Lyapunov decrease and subgradient bounds.
//!
//! `ρ(β)` is taken as `1 − |1 − β|`: the dual-bound argument splits
//! `BᵀΔz^{k+1}` into a convex combination with weights `ρ(β)` and `|1 − β|`,
//! which only sums to one under this definition, and it is positive exactly
//! on `β ∈ (0, 2)`.

use serde::Serialize;

use crate::error::{PadmmError, Result};
use crate::linalg::LinearOperator;
use crate::model::{ProblemSpec, SolverConfig};

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsBundle {
    pub rho_beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    /// `D = 2P + αBᵀB − L_h I_q`.
    #[serde(skip)]
    pub d: LinearOperator,
    /// `D̄ = D − 2ε₀(c₃ + c₄) I_q`.
    #[serde(skip)]
    pub d_bar: LinearOperator,
    pub lambda_min_d: f64,
    pub lambda_min_d_bar: f64,
    pub tau_bar: f64,
    /// `min{λ_min(D̄), τ̄, (ε₀ − 1)/(αβ)}`.
    pub sigma: f64,
    /// Smallest strictly positive eigenvalue of `BᵀB`.
    pub lambda_pp_btb: f64,
    /// Subgradient bound for `𝓛^α`.
    pub rho_sub: f64,
    /// Subgradient bound for the modified Lagrangian.
    pub rho_tilde: f64,
    pub lipschitz_h: f64,
    pub norm_p: f64,
    pub norm_b: f64,
    /// `Σ ‖A_i‖`.
    pub norm_a_sum: f64,
    /// `Σ ‖Q_i‖`.
    pub norm_q_sum: f64,
    /// `λ_min(Q_i)` per block.
    pub q_min: Vec<f64>,
    /// `r₁ = ε₀c₃ + σ − ‖P‖²c₁`.
    pub r1: f64,
    /// `r₂ = ε₀c₅ − c₆`.
    pub r2: f64,
}

impl ConstantsBundle {
    pub fn sigma_positive(&self) -> bool {
        self.sigma > 0.0
    }

    pub fn r1_positive(&self) -> bool {
        self.r1 > 0.0
    }

    pub fn r2_positive(&self) -> bool {
        self.r2 > 0.0
    }
}

/// `ρ(β) = 1 − |1 − β|`.
pub fn rho_of_beta(beta: f64) -> f64 {
    1.0 - (1.0 - beta).abs()
}

struct Norms {
    q_sum: f64,
    a_sum: f64,
    p: f64,
    b: f64,
}

fn norms(problem: &ProblemSpec, config: &SolverConfig) -> Norms {
    let blocks = problem.blocks();
    Norms {
        q_sum: blocks.iter().map(|b| b.q.spectral_norm()).sum(),
        a_sum: blocks.iter().map(|b| b.a.spectral_norm()).sum(),
        p: config.p.spectral_norm(),
        b: problem.coupling().spectral_norm(),
    }
}

/// `ρ = max{‖Q‖ + ‖A‖², ‖P‖ + α‖A‖‖B‖, ‖A‖ + ‖B‖ + 1/(αβ)}` with
/// `‖Q‖ = Σ‖Q_i‖`, `‖A‖ = Σ‖A_i‖` (spectral norms).
pub fn rho_bound(problem: &ProblemSpec, config: &SolverConfig) -> f64 {
    let n = norms(problem, config);
    rho_from_norms(&n, config.alpha, config.beta)
}

fn rho_from_norms(n: &Norms, alpha: f64, beta: f64) -> f64 {
    (n.q_sum + n.a_sum * n.a_sum)
        .max(n.p + alpha * n.a_sum * n.b)
        .max(n.a_sum + n.b + 1.0 / (alpha * beta))
}

pub fn compute_constants(problem: &ProblemSpec, config: &SolverConfig) -> Result<ConstantsBundle> {
    let alpha = config.alpha;
    let beta = config.beta;
    let eps0 = config.epsilon0;

    let rho_beta = rho_of_beta(beta);
    if !(rho_beta > 0.0) {
        return Err(PadmmError::ConstantsUndefined(format!("rho(beta) = {rho_beta} for beta = {beta}")));
    }
    config.validate_for(problem)?;
    let btb = problem.coupling().gram();
    let lambda_pp_btb = btb.smallest_positive_eigenvalue().ok_or_else(|| {
        PadmmError::ConstantsUndefined("B^T B has no strictly positive eigenvalue".into())
    })?;

    let n = norms(problem, config);
    let lh = problem.smooth().lipschitz();
    let one_minus_beta = (1.0 - beta).abs();

    let c1 = 1.0 / (alpha * rho_beta * lambda_pp_btb);
    let c2 = 2.0 * beta / (alpha * rho_beta * rho_beta * lambda_pp_btb);
    let c3 = c2 * n.p * n.p;
    let c4 = c2 * (n.p + lh) * (n.p + lh);
    let c5 = one_minus_beta * c1 / beta;
    let c6 = one_minus_beta / (2.0 * alpha * beta * beta * lambda_pp_btb);

    let q = problem.y_dim();
    let d = config.p.scale(2.0).add(&btb.scale(alpha)).add_identity(-lh);
    debug_assert_eq!(d.nrows(), q);
    let d_bar = d.add_identity(-2.0 * eps0 * (c3 + c4));
    let lambda_min_d = d.min_eigenvalue();
    let lambda_min_d_bar = d_bar.min_eigenvalue();

    // Per block: max{q_i, λ_++(αA_iᵀA_i − ε_i I)}; the second branch only when ε_i is supplied.
    let mut q_min = Vec::with_capacity(problem.num_blocks());
    let mut tau_bar = f64::INFINITY;
    for blk in problem.blocks() {
        let qi = blk.q.min_eigenvalue();
        q_min.push(qi);
        let mut best = qi;
        if let Some(eps) = blk.weak_convexity {
            let t = blk.a.gram().scale(alpha).add_identity(-eps);
            if let Some(lpp) = t.smallest_positive_eigenvalue() {
                best = best.max(lpp);
            }
        }
        tau_bar = tau_bar.min(best);
    }

    let sigma = lambda_min_d_bar.min(tau_bar).min((eps0 - 1.0) / (alpha * beta));
    let rho_sub = rho_from_norms(&n, alpha, beta);
    let rho_tilde = (n.q_sum + n.a_sum * n.a_sum)
        .max(n.p + alpha * n.a_sum * n.b + 4.0 * eps0 * c3)
        .max(n.a_sum + n.b + 4.0 * eps0 * c5 * n.b * n.b + 1.0 / (alpha * beta));

    Ok(ConstantsBundle {
        rho_beta,
        c1,
        c2,
        c3,
        c4,
        c5,
        c6,
        d,
        d_bar,
        lambda_min_d,
        lambda_min_d_bar,
        tau_bar,
        sigma,
        lambda_pp_btb,
        rho_sub,
        rho_tilde,
        lipschitz_h: lh,
        norm_p: n.p,
        norm_b: n.b,
        norm_a_sum: n.a_sum,
        norm_q_sum: n.q_sum,
        q_min,
        r1: eps0 * c3 + sigma - n.p * n.p * c1,
        r2: eps0 * c5 - c6,
    })
}
