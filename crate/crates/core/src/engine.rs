//! The proximal ADMM iteration.
//!
//! One iteration updates the blocks `x_1, …, x_p` in Gauss–Seidel order, then
//! `y`, then takes the dual step `z ← z + αβ(Σ A_i x_i + B y + b)`. Each
//! subproblem carries the proximal term `½‖· − ·^k‖²_M` for its own `Q_i` or
//! `P`; with every such matrix zero this is plain ADMM.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::constants::{compute_constants, ConstantsBundle};
use crate::error::{PadmmError, Result, UpdateTarget};
use crate::lagrangian::{augmented_lagrangian_unchecked, lyapunov_correction};
use crate::model::{BlockSubproblem, CheckLevel, Iterate, ProblemSpec, SolverConfig, YSubproblem};

/// Relative slack for inequality checks.
pub const INEQUALITY_RTOL: f64 = 1e-8;
/// Relative tolerance for identities that hold exactly in exact arithmetic.
pub const IDENTITY_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepNorms {
    pub x: Vec<f64>,
    pub y: f64,
    pub z: f64,
}

impl StepNorms {
    pub fn x_total(&self) -> f64 {
        self.x.iter().sum()
    }

    /// `Σ‖Δx_i‖ + ‖Δy‖ + ‖Δz‖`.
    pub fn sum(&self) -> f64 {
        self.x_total() + self.y + self.z
    }

    /// `Σ‖Δx_i‖² + ‖Δy‖² + ‖Δz‖²`.
    pub fn sum_sq(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum::<f64>() + self.y * self.y + self.z * self.z
    }
}

/// `𝓛^α` at each stage of one iteration, with the quadratic forms the
/// per-update decrease bounds compare against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageValues {
    /// `𝓛^α(x^k, y^k, z^k)`.
    pub start: f64,
    /// Value after each block update.
    pub after_blocks: Vec<f64>,
    pub after_y: f64,
    pub after_z: f64,
    /// `½‖Δx_i‖²_{Q_i}`.
    pub block_quad: Vec<f64>,
    pub block_exact: Vec<bool>,
    /// `½‖Δy‖²_D`.
    pub y_quad: f64,
    /// `‖Δz‖²/(αβ)`.
    pub z_term: f64,
}

/// Quantities entering the dual bounds at iteration `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualQuantities {
    /// `‖Bᵀz^k − βw^k − (1−β)Bᵀz^{k−1}‖` with `w^k = −PΔy^k − ∇h(y^k)`.
    pub identity_residual: f64,
    /// Magnitude of the terms in the identity, for relative comparison.
    pub identity_scale: f64,
    pub dy_sq: f64,
    pub dz_sq: f64,
    pub bt_dz_sq: f64,
    pub z_sq: f64,
    pub grad_h_sq: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckFlags {
    pub sufficient_decrease: Option<bool>,
    pub subgradient_bound: Option<bool>,
    pub z_identity: Option<bool>,
    pub per_update: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub l_alpha: f64,
    pub l_bar: f64,
    pub residual_norm: f64,
    pub steps: StepNorms,
    pub d_norm: f64,
    pub objective: f64,
    pub checks: CheckFlags,
    pub stages: Option<StageValues>,
    pub dual: Option<DualQuantities>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Converged,
    MaxIter,
    OracleFailure,
}

#[derive(Debug)]
pub struct SolveOutput {
    pub iterate: Iterate,
    pub trace: Vec<TraceRecord>,
    pub reason: TerminationReason,
    pub constants: ConstantsBundle,
    /// The iterate before `iterate`, for measures built from consecutive iterates.
    pub previous: Option<Iterate>,
    /// Set when `reason == OracleFailure`.
    pub failure: Option<PadmmError>,
}

/// Element of `∂𝓛^α(x^k, y^k, z^k)` built from consecutive iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgradient {
    pub dx: Vec<DVector<f64>>,
    pub dy: DVector<f64>,
    pub dz: DVector<f64>,
    /// `Σ‖d_{x_i}‖ + ‖d_y‖ + ‖d_z‖`.
    pub norm: f64,
}

/// `d_{x_i} = A_iᵀΔz + αA_iᵀ Σ_{j>i} A_jΔx_j + αA_iᵀBΔy − Q_iΔx_i`,
/// `d_y = BᵀΔz − PΔy`, `d_z = Δz/(αβ)`.
pub fn subgradient_surrogate(
    problem: &ProblemSpec,
    config: &SolverConfig,
    current: &Iterate,
    previous: &Iterate,
) -> Result<Subgradient> {
    current.check_dims(problem)?;
    previous.check_dims(problem)?;
    let alpha = config.alpha;
    let b = problem.coupling();
    let dz = &current.z - &previous.z;
    let dy = &current.y - &previous.y;
    let b_dy = b.apply(&dy);
    let blocks = problem.blocks();
    let a_dx: Vec<DVector<f64>> = blocks
        .iter()
        .zip(current.x.iter().zip(&previous.x))
        .map(|(blk, (xc, xp))| blk.a.apply(&(xc - xp)))
        .collect();

    let mut dx = Vec::with_capacity(blocks.len());
    // Suffix sums Σ_{j>i} A_jΔx_j.
    let mut tail = DVector::zeros(problem.m());
    let mut rev = Vec::with_capacity(blocks.len());
    for i in (0..blocks.len()).rev() {
        rev.push(tail.clone());
        tail += &a_dx[i];
    }
    rev.reverse();
    for (i, blk) in blocks.iter().enumerate() {
        let inner = &dz + (&rev[i] + &b_dy) * alpha;
        let delta = &current.x[i] - &previous.x[i];
        dx.push(blk.a.apply_transpose(&inner) - blk.q.apply(&delta));
    }
    let d_y = b.apply_transpose(&dz) - config.p.apply(&dy);
    let d_z = &dz / (alpha * config.beta);
    let norm = dx.iter().map(|v| v.norm()).sum::<f64>() + d_y.norm() + d_z.norm();
    Ok(Subgradient { dx, dy: d_y, dz: d_z, norm })
}

/// One iteration. The returned iterate has `y_prev`/`z_prev` rotated and `k`
/// incremented.
pub fn padmm_iterate(problem: &ProblemSpec, config: &SolverConfig, it: &Iterate) -> Result<Iterate> {
    config.validate_for(problem)?;
    it.check_dims(problem)?;
    step(problem, config, it, false).map(|(next, _)| next)
}

/// Like [`padmm_iterate`], also returning the intermediate Lagrangian values.
pub fn padmm_iterate_staged(
    problem: &ProblemSpec,
    config: &SolverConfig,
    it: &Iterate,
) -> Result<(Iterate, StageValues)> {
    config.validate_for(problem)?;
    it.check_dims(problem)?;
    let (next, stages) = step(problem, config, it, true)?;
    Ok((next, stages.expect("stages requested")))
}

fn oracle_output(target: UpdateTarget, out: DVector<f64>, expected: usize) -> Result<DVector<f64>> {
    if out.len() != expected {
        return Err(PadmmError::Oracle {
            target,
            message: format!("returned a vector of length {}, expected {expected}", out.len()),
        });
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(PadmmError::Oracle { target, message: "returned non-finite entries".into() });
    }
    Ok(out)
}

fn step(
    problem: &ProblemSpec,
    config: &SolverConfig,
    it: &Iterate,
    record: bool,
) -> Result<(Iterate, Option<StageValues>)> {
    let alpha = config.alpha;
    let lagrangian = |x: &[DVector<f64>], y: &DVector<f64>, z: &DVector<f64>| {
        augmented_lagrangian_unchecked(problem, alpha, x, y, z)
    };
    let blocks = problem.blocks();
    let mut x = it.x.clone();
    let mut ax: Vec<DVector<f64>> = blocks.iter().zip(&x).map(|(b, xi)| b.a.apply(xi)).collect();
    let base = problem.coupling().apply(&it.y) + problem.offset() + &it.z / alpha;

    let mut stages = record.then(|| StageValues {
        start: lagrangian(&x, &it.y, &it.z),
        after_blocks: Vec::with_capacity(blocks.len()),
        after_y: 0.0,
        after_z: 0.0,
        block_quad: Vec::with_capacity(blocks.len()),
        block_exact: blocks.iter().map(|b| b.oracle.is_exact()).collect(),
        y_quad: 0.0,
        z_term: 0.0,
    });

    for (i, blk) in blocks.iter().enumerate() {
        let mut shift = base.clone();
        for (j, axj) in ax.iter().enumerate() {
            if j != i {
                shift += axj;
            }
        }
        let sub = BlockSubproblem { index: i, a: &blk.a, q: &blk.q, alpha, shift: &shift, x_prev: &it.x[i] };
        let target = UpdateTarget::Block(i + 1);
        let out = blk
            .oracle
            .minimize(&sub)
            .map_err(|e| PadmmError::Oracle { target, message: e.0 })?;
        let xi = oracle_output(target, out, blk.dim())?;
        ax[i] = blk.a.apply(&xi);
        x[i] = xi;
        if let Some(s) = stages.as_mut() {
            s.after_blocks.push(lagrangian(&x, &it.y, &it.z));
            let dx = &x[i] - &it.x[i];
            s.block_quad.push(0.5 * blk.q.quad_form(&dx));
        }
    }

    let mut ax_total = DVector::zeros(problem.m());
    for v in &ax {
        ax_total += v;
    }
    let y_shift = ax_total + problem.offset() + &it.z / alpha;
    let sub = YSubproblem { b: problem.coupling(), p: &config.p, alpha, shift: &y_shift, y_prev: &it.y };
    let out = problem
        .smooth()
        .minimize(&sub)
        .map_err(|e| PadmmError::Oracle { target: UpdateTarget::Y, message: e.0 })?;
    let y = oracle_output(UpdateTarget::Y, out, problem.y_dim())?;

    let r = problem.residual(&x, &y);
    let z = &it.z + &r * (alpha * config.beta);

    if let Some(s) = stages.as_mut() {
        s.after_y = lagrangian(&x, &y, &it.z);
        s.after_z = lagrangian(&x, &y, &z);
        let dy = &y - &it.y;
        let lh = problem.smooth().lipschitz();
        s.y_quad = config.p.quad_form(&dy) + 0.5 * alpha * problem.coupling().apply(&dy).norm_squared()
            - 0.5 * lh * dy.norm_squared();
        s.z_term = (&z - &it.z).norm_squared() / (alpha * config.beta);
    }

    let next = Iterate { x, y, z, y_prev: it.y.clone(), z_prev: it.z.clone(), k: it.k + 1 };
    Ok((next, stages))
}

fn dual_quantities(problem: &ProblemSpec, config: &SolverConfig, next: &Iterate) -> DualQuantities {
    let b = problem.coupling();
    let beta = config.beta;
    let dy = &next.y - &next.y_prev;
    let dz = &next.z - &next.z_prev;
    let grad = problem.smooth().gradient(&next.y);
    let w = -config.p.apply(&dy) - &grad;
    let bt_z = b.apply_transpose(&next.z);
    let bt_z_prev = b.apply_transpose(&next.z_prev);
    let identity = &bt_z - &w * beta - &bt_z_prev * (1.0 - beta);
    DualQuantities {
        identity_residual: identity.norm(),
        identity_scale: bt_z.norm() + beta * w.norm() + (1.0 - beta).abs() * bt_z_prev.norm(),
        dy_sq: dy.norm_squared(),
        dz_sq: dz.norm_squared(),
        bt_dz_sq: b.apply_transpose(&dz).norm_squared(),
        z_sq: next.z.norm_squared(),
        grad_h_sq: grad.norm_squared(),
    }
}

pub(crate) fn within(lhs: f64, rhs: f64, slack: f64) -> bool {
    lhs <= rhs + slack
}

/// Per-update bounds on one iteration's stage values: each block
/// update and the `y` update decrease `𝓛^α` by at least the matching quadratic
/// form, and the dual step raises it by exactly `‖Δz‖²/(αβ)`.
pub(crate) fn stage_checks_pass(s: &StageValues) -> bool {
    let scale = |v: f64| v.abs().max(1.0);
    let mut prev = s.start;
    for (i, &after) in s.after_blocks.iter().enumerate() {
        if s.block_exact[i] && !within(s.block_quad[i], prev - after, INEQUALITY_RTOL * scale(prev)) {
            return false;
        }
        prev = after;
    }
    let exact = s.block_exact.iter().all(|&e| e);
    if exact && !within(s.y_quad, prev - s.after_y, INEQUALITY_RTOL * scale(prev)) {
        return false;
    }
    let diff = (s.after_y - s.after_z) + s.z_term;
    diff.abs() <= IDENTITY_RTOL * scale(s.after_y).max(scale(s.after_z))
}

/// Run until `‖Σ A_i x_i + B y + b‖ ≤ tol_residual` and
/// `Σ‖Δx_i‖ + ‖Δy‖ + ‖Δz‖ ≤ tol_step`, or `max_iter` iterations.
pub fn solve(problem: &ProblemSpec, config: &SolverConfig, init: Option<Iterate>) -> Result<SolveOutput> {
    let constants = compute_constants(problem, config)?;
    let mut current = match init {
        Some(it) => {
            it.check_dims(problem)?;
            it
        }
        None => Iterate::zeros(problem),
    };
    if !constants.sigma_positive() {
        log::warn!(
            "sigma = {:.3e} <= 0: sufficient decrease of the modified Lagrangian is not guaranteed",
            constants.sigma
        );
    }
    let all_exact = problem.blocks().iter().all(|b| b.oracle.is_exact());
    let cheap = config.check_level != CheckLevel::Off;
    let full = config.check_level == CheckLevel::Full;
    let alpha = config.alpha;
    let beta = config.beta;

    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut reason = TerminationReason::MaxIter;
    let mut failure = None;
    let mut previous = None;

    for _ in 0..config.max_iter {
        let (next, stages) = match step(problem, config, &current, full) {
            Ok(v) => v,
            Err(e) => {
                log::error!("iteration {} aborted: {e}", current.k + 1);
                reason = TerminationReason::OracleFailure;
                failure = Some(e);
                break;
            }
        };
        let steps = StepNorms {
            x: next.x.iter().zip(&current.x).map(|(a, b)| (a - b).norm()).collect(),
            y: (&next.y - &current.y).norm(),
            z: (&next.z - &current.z).norm(),
        };
        let l_alpha = augmented_lagrangian_unchecked(problem, alpha, &next.x, &next.y, &next.z);
        let l_bar = l_alpha + lyapunov_correction(problem, config, &constants, &next);
        let r = problem.residual(&next.x, &next.y);
        let residual_norm = r.norm();
        let d_norm = subgradient_surrogate(problem, config, &next, &current)?.norm;
        let objective = problem.objective(&next.x, &next.y);

        let mut checks = CheckFlags::default();
        if cheap {
            checks.subgradient_bound =
                Some(d_norm <= constants.rho_sub * steps.sum() * (1.0 + INEQUALITY_RTOL));
            if let Some(prev) = trace.last() {
                if constants.sigma_positive() && all_exact {
                    checks.sufficient_decrease = Some(within(
                        l_bar + constants.sigma * steps.sum_sq(),
                        prev.l_bar,
                        INEQUALITY_RTOL * prev.l_bar.abs().max(1.0),
                    ));
                }
            }
            let dz_scaled = (&next.z - &current.z) / (alpha * beta);
            let scale = 1f64.max(residual_norm).max(current.z.norm() / (alpha * beta));
            checks.z_identity = Some((&r - dz_scaled).norm() <= IDENTITY_RTOL * scale);
        }
        if let Some(s) = &stages {
            checks.per_update = Some(stage_checks_pass(s));
        }
        let dual = full.then(|| dual_quantities(problem, config, &next));

        trace.push(TraceRecord {
            k: next.k,
            l_alpha,
            l_bar,
            residual_norm,
            steps,
            d_norm,
            objective,
            checks,
            stages,
            dual,
        });
        let converged = residual_norm <= config.tol_residual && trace.last().unwrap().steps.sum() <= config.tol_step;
        previous = Some(std::mem::replace(&mut current, next));
        if converged {
            reason = TerminationReason::Converged;
            break;
        }
    }

    Ok(SolveOutput { iterate: current, previous, trace, reason, constants, failure })
}
