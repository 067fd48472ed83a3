//! Configuration, initial conditions, checkpoints, CSV reports and run
//! orchestration for the `torus-ns` command-line tool.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod ic;
pub mod report;
pub mod run;

pub use config::{parse_config, Emit, IcKind, RunConfig};
pub use error::{CliError, Result};
