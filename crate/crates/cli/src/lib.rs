//! Experiment harness around the tracking library: declarative configs,
//! dataset generation, streaming runs, comparisons, and sweeps.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;

pub use commands::{cmd_compare, cmd_gen, cmd_run, cmd_sweep};
pub use config::{ExperimentConfig, Overrides};
pub use error::{CliError, Result, EXIT_CONFIG, EXIT_NUMERICAL};
