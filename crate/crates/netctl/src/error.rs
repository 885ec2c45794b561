//! Error type shared across the crate.

use std::io;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("network generation failed: {0}")]
    Generation(String),

    #[error("edge list parse error at line {line}: {msg}")]
    EdgeList { line: usize, msg: String },

    #[error("not output controllable: log10(mu_1) = {log10_mu1:.4}, floor is 10^-{floor_digits}")]
    NotControllable { log10_mu1: f64, floor_digits: u32 },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("Riccati solver failure: {0}")]
    Riccati(String),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("numerical fault: {0}")]
    Numerical(String),

    #[error("invalid operation: {0}")]
    InvalidState(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 0 success, 2 config, 3 generation, 4 controllability,
    /// 5 solver, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidState(_) => 2,
            Error::Generation(_) | Error::EdgeList { .. } => 3,
            Error::NotControllable { .. } => 4,
            Error::Eigen(_) | Error::Riccati(_) | Error::Integrator(_) | Error::Numerical(_) => 5,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}
