use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: {left} vs {right} objects")]
    LengthMismatch { left: usize, right: usize },

    #[error("label {label} at position {position} is outside 1..={k}")]
    LabelOutOfRange { label: u32, position: usize, k: usize },

    #[error("cluster count mismatch: {left} vs {right}")]
    ClusterCountMismatch { left: usize, right: usize },

    #[error("metric undefined for {objects} object(s); at least 2 are required")]
    UndefinedMetric { objects: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid transition matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
