use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The caller handed over something malformed or out of range.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A computed object broke a law it must satisfy. Always a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
