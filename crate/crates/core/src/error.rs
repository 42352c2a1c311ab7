use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("copula dependence parameter must be >= 1, got {0}")]
    AlphaDomain(f64),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid trial data: {0}")]
    InvalidData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing cells for alpha = {alpha}: {missing}")]
    MissingCells { alpha: f64, missing: String },

    #[error("results schema mismatch: {0}")]
    Schema(String),

    #[error("worker pool: {0}")]
    Pool(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
