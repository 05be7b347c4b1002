//! Experiment harness for the accelerated direct method: seeded
//! configurations, algorithm runs and step-size sweeps, CSV traces and the
//! randomized invariant suite. The `adm` binary is a thin CLI over this
//! library.

// `!(a < b)` style comparisons are used on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod check;
pub mod config;
pub mod experiment;
pub mod tune;

use std::path::PathBuf;

pub use artifacts::{compare_experiment, run_experiment, CompareOutcome, RunOutcome};
pub use check::{run_checks, CheckOptions, CheckReport, Fault};
pub use config::ExperimentConfig;
pub use experiment::{Setup, SummaryRow, SweepGrid};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid configuration field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error("{0}: {1}")]
    Csv(PathBuf, String),
    #[error(transparent)]
    Core(#[from] adm_core::Error),
}
