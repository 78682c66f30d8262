//! Batch front-end for the padmm solver: JSON run configs, matrix files,
//! trace CSVs, and the `run`, `verify` and `rate` commands.

pub mod atomic;
pub mod commands;
pub mod config;
pub mod matrix_io;
pub mod trace_io;
