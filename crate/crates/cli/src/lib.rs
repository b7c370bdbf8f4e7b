//! Configuration and pipeline stages behind the `qdot` binary.

// Negated comparisons reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod stages;

pub use config::RunConfig;
pub use error::CliError;
pub use stages::{run_all, run_extract, run_ground, run_propagate, run_validate, Source};
