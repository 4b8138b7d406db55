use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("logic error: {0}")]
    Logic(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("checkpoint format error in `{field}`: {message}")]
    Format { field: String, message: String },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("data error on line {line}: {message}")]
    Data { line: usize, message: String },

    #[error("undefined average proportion: {0}")]
    UndefinedAp(String),

    #[error("no feasible agent under AP budget {ap_max}")]
    NoFeasibleAgent {
        ap_max: f64,
        grid: Vec<crate::agents::GridPoint>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn format_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Format {
        field: field.into(),
        message: message.into(),
    }
}
