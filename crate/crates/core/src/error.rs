use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("session is complete")]
    Complete,

    #[error("session is suspended: {0}")]
    Suspended(String),

    #[error("expected {expected}, got {got}")]
    WrongPrompt { expected: String, got: String },

    #[error("nothing to undo")]
    NothingToUndo,

    #[error("estimate unavailable: {0}")]
    Estimate(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
