use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed delimited text. `line` and `column` are 1-based; column 0
    /// means the problem is not tied to a single cell.
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("duplicate identifier `{id}` (rows {first} and {second})")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("matrix is not symmetric: |s[{i}][{j}] - s[{j}][{i}]| = {difference:e} exceeds {tolerance:e}")]
    Asymmetric {
        i: usize,
        j: usize,
        difference: f64,
        tolerance: f64,
    },

    #[error("identifier count mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("identifier order mismatch at position {position}: `{left}` vs `{right}`")]
    OrderMismatch {
        position: usize,
        left: String,
        right: String,
    },

    #[error("identifier sets differ: {0}")]
    SetMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("regularized system is numerically singular at lambda = {lambda:e}; use lambda > 0")]
    NumericalRank { lambda: f64 },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("no convergence after {iterations} iterations (remaining gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("negative weights at feature indices {indices:?}")]
    NegativeWeights { indices: Vec<usize> },

    #[error("class `{class}` has {count} members, fewer than the {folds} folds requested")]
    ClassTooSmall {
        class: String,
        count: usize,
        folds: usize,
    },

    #[error("similarity matrix has no diagonal; gram-distance needs one, use max-shift instead")]
    MissingDiagonal,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
