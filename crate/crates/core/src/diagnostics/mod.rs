//! Runtime verification of the convergence theory and empirical rate fitting.
//! Everything here is a pure function of a finished trace.

mod checks;
mod finite_length;
mod rate;

pub use checks::{
    check_dual_bounds, check_per_update_decrease, check_subgradient_bound, check_sufficient_decrease,
    dual_step_identity_max_error, range_condition_residual, stationarity_measure, sufficient_decrease_reports,
    CheckReport, DualBoundsOutcome,
};
pub use finite_length::{finite_length_from_steps, finite_length_monitor, FiniteLengthReport, MIN_RECORDS};
pub use rate::{
    error_sequence, kl_rate_fit, linear_regression, trace_error_sequence, BurnIn, RateEstimate, Regime,
    DROP_TAIL_FRACTION, FLOOR_RTOL, MIN_POINTS, MIN_R2,
};
