use crate::symbol::Symbol;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("level {level} out of range 1..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("gradedness violation: {0}")]
    Graded(String),

    #[error("letter `{0}` is not in the alphabet")]
    UnknownLetter(Symbol),

    #[error("unknown index `{0}`")]
    UnknownIndex(Symbol),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("{0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}
