use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PaaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected} covariates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("missing covariates: {0}")]
    MissingCovariates(String),

    #[error("failed to converge: {0}")]
    NoConvergence(String),

    #[error("linear program is {0}")]
    Lp(&'static str),

    #[error("fit of candidate `{candidate}` failed on fold {fold}: {source}")]
    FoldFit {
        candidate: String,
        fold: usize,
        #[source]
        source: Box<PaaError>,
    },

    #[error("replication {replication} at t = {t} (seed {seed}) failed: {source}")]
    Replication {
        t: usize,
        replication: usize,
        seed: u64,
        #[source]
        source: Box<PaaError>,
    },

    #[error("internal fault: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = PaaError> = std::result::Result<T, E>;

impl From<std::io::Error> for PaaError {
    fn from(e: std::io::Error) -> Self {
        PaaError::Io(e.to_string())
    }
}

impl From<csv::Error> for PaaError {
    fn from(e: csv::Error) -> Self {
        PaaError::Parse(e.to_string())
    }
}
