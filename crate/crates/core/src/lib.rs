//! Multi-block proximal ADMM for
//!
//! ```text
//! min  Σ_i f_i(x_i) + h(y)   s.t.  Σ_i A_i x_i + B y + b = 0
//! ```
//!
//! with nonsmooth, possibly nonconvex `f_i` and smooth `h`, plus runtime
//! checks of the convergence theory (Lyapunov decrease, subgradient and dual
//! bounds) and an empirical rate-regime fitter.

pub mod constants;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod lagrangian;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod problems;
pub mod prox;

pub use constants::{compute_constants, rho_bound, rho_of_beta, ConstantsBundle};
pub use engine::{
    padmm_iterate, padmm_iterate_staged, solve, subgradient_surrogate, CheckFlags, DualQuantities, SolveOutput,
    StageValues, StepNorms, Subgradient, TerminationReason, TraceRecord, IDENTITY_RTOL, INEQUALITY_RTOL,
};
pub use error::{OracleError, PadmmError, Result, UpdateTarget};
pub use lagrangian::{augmented_lagrangian, modified_lagrangian};
pub use linalg::LinearOperator;
pub use model::{
    BlockOracle, BlockSpec, BlockSubproblem, CheckLevel, Iterate, ProblemSpec, SmoothTerm, SolverConfig, YSubproblem,
};
pub use prox::{McpParams, Penalty, ScadParams};

pub use nalgebra;
