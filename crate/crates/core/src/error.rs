use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (bad index, stepping a
    /// finished episode, mismatched shapes).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The configuration is syntactically or semantically invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A non-finite value showed up during a forward/backward pass or update.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Checkpoint could not be decoded.
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
