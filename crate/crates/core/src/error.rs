use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite parameter in view {view} at epoch {epoch}, step {step}")]
    NonFinite {
        epoch: usize,
        view: usize,
        step: usize,
    },

    #[error("{0}")]
    Metric(String),

    #[error("fold {fold}: training split contains a single class")]
    SingleClassFold { fold: usize },

    #[error("not enough candidate negatives: need {needed}, have {available}")]
    NotEnoughNegatives { needed: usize, available: usize },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Errors caused by bad input or configuration rather than a bug or a
    /// numerical failure.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::NonFinite { .. })
    }
}
