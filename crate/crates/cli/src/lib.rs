//! Experiment runner for the elastodynamic Cauchy problem solver.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiments::{prepare, run, sweep, Prepared, Report, ResultRow};
