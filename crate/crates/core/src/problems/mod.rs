//! Builders for the two worked applications and seeded instance generators.

mod generators;
mod regression;
mod slr;

pub use generators::{gen_slr_instance, gen_sparse_regression, rng_from_seed, SlrInstance, SparseRegressionInstance};
pub use regression::{
    build_scad_mcp_regression, penalty_weak_convexity, ScadMcpRegressionConfig, DEFAULT_TAU_FACTOR, TAU_MARGIN,
};
pub use slr::{build_slr_decomposition, flatten, unflatten, ColumnSmoothness, SlrBlock, SlrConfig, STEP_FRACTION};
