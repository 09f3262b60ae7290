use thiserror::Error;

/// Errors raised by the geometry and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("chart mismatch: {0}")]
    ChartMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("triangle too large for curvature k = {k}: {detail}")]
    TriangleTooLarge { k: f64, detail: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("instance too large for exhaustive search ({size} > {limit}); use the local search")]
    TooLarge { size: usize, limit: usize },

    #[error("inconclusive numerics: {0}")]
    Inconclusive(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by numerics that failed to settle, as opposed
    /// to invalid input.
    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Error::Inconclusive(_))
    }
}
