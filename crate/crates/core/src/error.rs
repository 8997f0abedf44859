use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("table has no usable columns")]
    NoColumns,

    #[error("non-numeric cell {value:?} at row {row}, column {column:?}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("column {0:?} has < 2 distinct values")]
    DegenerateColumn(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("constant input vector")]
    ConstantInput,

    #[error("correlation {0} is outside the open interval (-1, 1)")]
    InvalidCorrelation(f64),

    #[error("degenerate contingency table: {0}")]
    DegenerateTable(String),

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("all off-diagonal correlations are zero; lambda path is degenerate")]
    DegeneratePath,

    #[error("no lambda on the path produced a valid fit")]
    AllFitsFailed,

    #[error("node index {index} out of range for a {len}-node network")]
    NodeOutOfRange { index: usize, len: usize },

    #[error("alpha {alpha} is below the achievable floor 2/N_B = {floor} (N_B = {n_boots})")]
    AlphaBelowFloor {
        alpha: f64,
        floor: f64,
        n_boots: usize,
    },

    #[error("{failed} of {total} bootstrap replicates failed (limit is 25%)")]
    TooManyFailures { failed: usize, total: usize },

    #[error("drop level {level} retains {retained}, need at least {required}")]
    TooFewRetained {
        level: f64,
        retained: usize,
        required: usize,
    },

    #[error("unknown element {0:?}")]
    UnknownElement(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }
}
