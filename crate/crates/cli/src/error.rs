use conformal_core::Error as CoreError;

/// Everything that can end a run. The variant fixes the exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: unreadable file, schema violation, unsupported request.
    #[error("{0}")]
    Validation(String),

    /// The computation itself failed (singular metric, degree too low, ...).
    #[error("{0}")]
    Numerical(String),

    /// Two paths that should agree do not. The report is still printed.
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::CheckFailed(_) => 3,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Mismatch(_)
            | CoreError::InvalidIndex(_)
            | CoreError::UnsupportedDimension { .. }
            | CoreError::InvalidArgument(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
