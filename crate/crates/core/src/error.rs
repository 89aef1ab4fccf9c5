use thiserror::Error;

/// Errors raised by schedule construction and analysis.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid value vector: {0}")]
    InvalidValues(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("target {0} never visited")]
    TargetNeverVisited(usize),

    #[error("invalid gap distribution: {0}")]
    InvalidDistribution(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("too many coordinates ({0}) for exact enumeration, use sampling mode")]
    TooManyCoordinates(usize),

    #[error("matching failed after {attempts} attempts")]
    RetriesExhausted { attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
