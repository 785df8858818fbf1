use std::path::PathBuf;

/// Errors produced by the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("framing error: {0}")]
    Framing(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("channel model violation: {0}")]
    ModelViolation(String),

    #[error("singular pilot at position {0}")]
    SingularPilot(usize),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidDimension(msg.into()))
}
