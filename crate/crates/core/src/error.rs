use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("invalid mode index: {0}")]
    Index(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("unphysical standard-form parameters: {0}")]
    UnphysicalParameters(String),

    #[error("nonzero x-p cross term {cross:.3e}; apply counter_rotation first")]
    CrossTerm { cross: f64 },

    #[error("solver did not converge (residual {residual:.3e}): {context}")]
    Convergence { context: String, residual: f64 },

    #[error("truncation leakage {leakage:.3e} exceeds {limit:.1e} at cutoff {cutoff}")]
    CutoffTooSmall { leakage: f64, limit: f64, cutoff: usize },

    #[error("zero-norm result: {0}")]
    ZeroNorm(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
