use std::path::PathBuf;

use thiserror::Error;

use crate::linalg::Matrix;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("kernel matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemiDefinite { min_eigenvalue: f64 },

    #[error("matrix is singular (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("resource limit exceeded: {what} needs {requested} entries, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("incomplete graph: {0}")]
    IncompleteGraph(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("ranking loss is undefined: no pair of edges with distinct labels in any group")]
    UndefinedLoss,

    #[error("BiCGSTAB breakdown at iteration {iteration}: {reason}")]
    SolverBreakdown {
        iteration: usize,
        reason: &'static str,
        /// Best iterate seen before the breakdown.
        last_iterate: Box<Matrix>,
    },

    #[error("iterative solver diverged at iteration {iteration} (non-finite residual)")]
    Divergence { iteration: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    VersionMismatch { found: String, expected: u32 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable category, used as the CLI error prefix.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::NotPositiveDefinite { .. } => "not-positive-definite",
            Error::NotPositiveSemiDefinite { .. } => "not-psd",
            Error::SingularMatrix { .. } => "singular-matrix",
            Error::ResourceLimit { .. } => "resource-limit",
            Error::IncompleteGraph(_) => "incomplete-graph",
            Error::Unsupported(_) => "unsupported-combination",
            Error::UndefinedLoss => "undefined-loss",
            Error::SolverBreakdown { .. } => "solver-breakdown",
            Error::Divergence { .. } => "divergence",
            Error::Parse { .. } => "parse",
            Error::MalformedModel(_) => "malformed-file",
            Error::VersionMismatch { .. } => "version-mismatch",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
