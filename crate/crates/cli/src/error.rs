use std::process::ExitCode;

/// Failures reported by the command line, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration or input file; exit code 2.
    #[error("{0}")]
    Input(String),
    /// A valid request that could not be completed; exit code 3.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Internal(_) => ExitCode::from(3),
        }
    }
}

impl From<patrol_core::Error> for CliError {
    fn from(e: patrol_core::Error) -> Self {
        match e {
            patrol_core::Error::RetriesExhausted { .. } => CliError::Internal(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
