//! Front end for the hyperfin engine: configuration loading and validation,
//! command orchestration, and CSV/SVG output.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

pub use commands::{run, Command, Outcome};
pub use config::{load, Experiment, RunConfig, BASELINE_PRESET};
pub use error::CliError;
