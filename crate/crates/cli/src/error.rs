use std::path::{Path, PathBuf};

use gencheb::genmat::GenError;
use gencheb::linalg::{LinalgError, MatrixMarketError};
use gencheb::solvers::SolveError;
use gencheb::spectrum::SpectrumError;
use gencheb::textio::TextError;
use thiserror::Error;

/// Process exit status for each error class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const INAPPLICABLE: i32 = 4;
    pub const NOT_CONVERGED: i32 = 5;
    pub const INVALID_INPUT: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {msg}", path.display())]
    UnreadableInput { path: PathBuf, msg: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("generalized Chebyshev acceleration is not applicable to this spectrum (report written)")]
    InapplicableSpectrum,
    #[error("{0}")]
    NotConverged(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::UnreadableInput { .. } | CliError::InvalidInput(_) => exit::INVALID_INPUT,
            CliError::InapplicableSpectrum => exit::INAPPLICABLE,
            CliError::NotConverged(_) => exit::NOT_CONVERGED,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn matrix_market(path: &Path, e: MatrixMarketError) -> Self {
        match e {
            MatrixMarketError::Io(source) => CliError::io(path, source),
            other => CliError::UnreadableInput { path: path.to_path_buf(), msg: other.to_string() },
        }
    }

    pub fn text(path: &Path, e: TextError) -> Self {
        CliError::UnreadableInput { path: path.to_path_buf(), msg: e.to_string() }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NotConverged(_) => CliError::NotConverged(e.to_string()),
            SolveError::Divergence { .. } | SolveError::Kernel(_) => CliError::InvalidInput(e.to_string()),
            SolveError::Linalg(LinalgError::DimensionMismatch { .. }) => CliError::InvalidInput(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::Linalg(LinalgError::ConvergenceFailure) => CliError::Internal(e.to_string()),
            other => CliError::InvalidInput(other.to_string()),
        }
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        match e {
            GenError::InvalidSpec(_) => CliError::InvalidInput(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        CliError::InvalidInput(e.to_string())
    }
}
