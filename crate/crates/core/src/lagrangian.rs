use nalgebra::DVector;

use crate::constants::ConstantsBundle;
use crate::error::Result;
use crate::model::{Iterate, ProblemSpec, SolverConfig};

/// `𝓛^α(x, y, z) = Σ f_i(x_i) + h(y) + ⟨z, r⟩ + (α/2)‖r‖²` with
/// `r = Σ A_i x_i + B y + b`. Returns `+∞` when some `f_i(x_i) = +∞`.
pub fn augmented_lagrangian(
    problem: &ProblemSpec,
    alpha: f64,
    x: &[DVector<f64>],
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<f64> {
    problem.check_point(x, y, z)?;
    Ok(augmented_lagrangian_unchecked(problem, alpha, x, y, z))
}

pub(crate) fn augmented_lagrangian_unchecked(
    problem: &ProblemSpec,
    alpha: f64,
    x: &[DVector<f64>],
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> f64 {
    let objective = problem.objective(x, y);
    if objective == f64::INFINITY {
        return f64::INFINITY;
    }
    let r = problem.residual(x, y);
    objective + z.dot(&r) + 0.5 * alpha * r.norm_squared()
}

/// The Lyapunov function `𝓛̄_k = 𝓛^α(x^k, y^k, z^k) + ε₀c₅‖BᵀΔz^k‖² + ε₀c₃‖Δy^k‖²`.
pub fn modified_lagrangian(
    problem: &ProblemSpec,
    config: &SolverConfig,
    constants: &ConstantsBundle,
    it: &Iterate,
) -> Result<f64> {
    it.check_dims(problem)?;
    let la = augmented_lagrangian_unchecked(problem, config.alpha, &it.x, &it.y, &it.z);
    Ok(la + lyapunov_correction(problem, config, constants, it))
}

pub(crate) fn lyapunov_correction(
    problem: &ProblemSpec,
    config: &SolverConfig,
    constants: &ConstantsBundle,
    it: &Iterate,
) -> f64 {
    let dz = &it.z - &it.z_prev;
    let dy = &it.y - &it.y_prev;
    let bt_dz = problem.coupling().apply_transpose(&dz);
    config.epsilon0 * (constants.c5 * bt_dz.norm_squared() + constants.c3 * dy.norm_squared())
}
