//! Experiment harness for the NST spectral laboratory: configuration files,
//! the six experiments, run manifests and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod initial;
pub mod manifest;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{run, run_and_write};
pub use manifest::{Check, Comparison, RunManifest};
