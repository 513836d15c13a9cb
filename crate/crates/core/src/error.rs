use thiserror::Error;

use crate::session::Phase;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("operation not allowed in phase {actual:?} (expected {expected:?})")]
    Phase { expected: Phase, actual: Phase },

    #[error("session cannot end yet: {remaining} assisted turn(s) remaining")]
    TurnsRemaining { completed: usize, required: usize, remaining: usize },

    #[error("session is busy with another turn")]
    Busy,

    #[error("no action available: exploration and exploitation are both exhausted")]
    NoActionAvailable,

    #[error("language backend error: {0}")]
    Gateway(String),

    #[error("could not parse model output: {message}")]
    Parse { message: String, raw: String },

    #[error("undefined effect size: pooled standard deviation is zero")]
    UndefinedEffect,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
