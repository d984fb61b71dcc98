use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input failed a precondition (non-finite value, bad shape, bad range).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("action {action} is not admissible in the current state")]
    InadmissibleAction { action: String },

    #[error("episode already terminated; call reset first")]
    EpisodeTerminated,

    #[error("environment has not been reset")]
    NotReset,

    #[error("scene is already in collision")]
    SceneColliding,

    #[error("no candidate action available")]
    EmptyCandidateSet,

    #[error("replay buffer is empty")]
    EmptyBuffer,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("snapshot parse error on line {line}: {message}")]
    Snapshot { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
