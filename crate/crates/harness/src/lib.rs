//! Experiment runner for complex graph signal reconstruction.
//!
//! A TOML [`config::ExperimentConfig`] describes a generator, a ground-truth
//! signal, a sweep and a list of estimators. [`experiment::run_experiment`]
//! evaluates every combination over seeded Monte Carlo trials and
//! [`report::write_report`] stores the aggregated NMSE table as CSV and JSON.

pub mod config;
pub mod dist_report;
pub mod error;
pub mod experiment;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ResultRow, ResultTable};
pub use report::write_report;
