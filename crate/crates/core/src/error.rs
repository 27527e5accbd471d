use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid transcript at row {row}: {reason}")]
    InvalidTranscript { row: usize, reason: String },
    #[error("horizon error: {0}")]
    Horizon(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("resource limit exceeded: {what} needs {needed}, budget is {budget}")]
    Resource {
        what: String,
        needed: u128,
        budget: u128,
    },
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }

    pub fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
