//! Harness-level failures, split by exit code: configuration problems
//! exit with 2, numerical failures during a run with 3.

use std::fmt;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, unusable input files, or I/O trouble.
    Config(String),
    /// A solver failed mid-run; the message names the step.
    Numerical(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    /// Wraps a core error that surfaced while processing a given step.
    pub fn at_step(step: usize, err: ogmc_core::Error) -> Self {
        match classify(&err) {
            EXIT_NUMERICAL => CliError::Numerical(format!("step {step}: {err}")),
            _ => CliError::Config(format!("step {step}: {err}")),
        }
    }
}

/// Convergence and conditioning failures are numerical; everything else
/// (shape errors, parse errors, bad parameters) traces back to inputs.
fn classify(err: &ogmc_core::Error) -> i32 {
    use ogmc_core::Error::*;
    match err {
        DidNotConverge { .. } | Numerical { .. } | NotPositiveSemidefinite { .. } => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ogmc_core::Error> for CliError {
    fn from(err: ogmc_core::Error) -> Self {
        match classify(&err) {
            EXIT_NUMERICAL => CliError::Numerical(err.to_string()),
            _ => CliError::Config(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Config(err.to_string())
    }
}

impl From<toml::de::Error> for CliError {
    fn from(err: toml::de::Error) -> Self {
        CliError::Config(err.to_string())
    }
}

impl From<toml::ser::Error> for CliError {
    fn from(err: toml::ser::Error) -> Self {
        CliError::Config(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
