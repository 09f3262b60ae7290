use thiserror::Error;

/// Exit status for invalid flags, ranges or inputs.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status when numerics could not settle a classification.
pub const EXIT_INCONCLUSIVE: i32 = 3;
/// Exit status for I/O failures and bugs.
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] lorlab_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_VALIDATION,
            CliError::Core(e) if e.is_inconclusive() => EXIT_INCONCLUSIVE,
            CliError::Core(_) => EXIT_VALIDATION,
            CliError::Io(_) | CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}
