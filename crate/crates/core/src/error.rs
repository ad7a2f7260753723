use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("unsupported family {family} for {operation}")]
    UnsupportedFamily { family: String, operation: &'static str },

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    #[error("unknown scenario '{0}' (valid: {1})")]
    UnknownScenario(String, String),

    #[error("unknown estimator '{0}' (valid: {1})")]
    UnknownEstimator(String, String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("record for player '{player}' is invalid: {message}")]
    InvalidRecord { player: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
            _ => Error::Parse {
                line,
                message: e.to_string(),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
