use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The inputs are well formed but violate an operation's precondition
    /// (wrong growth regime, too small a horizon, ...).
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },

    /// A solver or evaluation could not produce a trustworthy number.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse { token: token.into(), reason: reason.into() }
    }

    /// Process exit code used by the command line frontend.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::Domain(_) | Error::Precondition(_) | Error::IndexOutOfRange { .. } => 3,
            Error::Numeric(_) => 4,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}
