//! Experiment runner, parameter sweeps, geometry probes and demo data on top
//! of `tgp-core`.

// Negated comparisons are how NaN parameters get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod config;
pub mod demo;
pub mod probes;
pub mod report;
pub mod runner;
pub mod sweep;

pub use config::{ExperimentConfig, ExperimentId};
pub use runner::{run_experiment, ExperimentResult, MetricsRow, MetricsTable, RunSummary};
