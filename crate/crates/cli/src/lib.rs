//! Library surface of the `shape-uq` experiment runner: configuration,
//! estimator cells, CSV output and rate fitting. The binary in `main.rs` is
//! a thin dispatcher over these.

pub mod config;
pub mod experiment;
pub mod output;
pub mod ratefit;

use std::fmt;

use shape_uq_core::UqError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl From<UqError> for CliError {
    fn from(e: UqError) -> Self {
        match e {
            UqError::SolverFailure { .. }
            | UqError::EstimatorFailure { .. }
            | UqError::InadmissibleMap { .. }
            | UqError::CacheCorrupt { .. }
            | UqError::Io(_) => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
