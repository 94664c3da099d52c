use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's preconditions (shape, length, range).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Numeric fault during simulation (non-finite state, overflow, bad geometry).
    #[error("numeric fault: {0}")]
    Fault(String),

    #[error("invalid genome field `{field}`: {reason}")]
    InvalidGenome { field: String, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn fault(msg: impl Into<String>) -> Self {
        Error::Fault(msg.into())
    }

    pub(crate) fn genome(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidGenome {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
