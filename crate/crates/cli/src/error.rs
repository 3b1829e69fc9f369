use thiserror::Error;

/// Process exit status for each error class.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const BACKEND_MISMATCH: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config values or strategy names.
    #[error("usage: {0}")]
    Usage(String),

    /// Unreadable or malformed input, or failure writing outputs.
    #[error(transparent)]
    Data(#[from] hypervec::Error),

    #[error("backend mismatch: {0}")]
    BackendMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => exit::USAGE,
            Self::Data(_) => exit::DATA,
            Self::BackendMismatch(_) => exit::BACKEND_MISMATCH,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Data(hypervec::Error::Io(e))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Data(hypervec::Error::Io(std::io::Error::other(e)))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Data(hypervec::Error::Json(e))
    }
}

pub type CliResult<T> = Result<T, CliError>;
