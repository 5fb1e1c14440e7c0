use thiserror::Error;

/// Errors raised by the library and the CLI driver.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad or inconsistent parameters, such as mismatched branching numbers.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("arithmetic error: {0}")]
    Arithmetic(String),

    /// An operation needed vertices beyond the configured truncation ball.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// Input outside the domain of an operator (e.g. a non-even height sequence).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested operation is not available in this scalar mode.
    #[error("mode error: {0}")]
    Mode(String),

    #[error("invalid value for `{field}`: {message}")]
    Usage { field: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn usage(field: &str, message: impl Into<String>) -> Self {
        Error::Usage {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
