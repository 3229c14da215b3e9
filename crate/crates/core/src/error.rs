use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A degree distribution could not be realized as a graph.
    #[error("code construction failed at degree {degree}: {reason}")]
    Construction { degree: usize, reason: String },

    /// Malformed alist input.
    #[error("alist parse error at line {line}: {reason}")]
    Alist { line: usize, reason: String },

    /// Invalid experiment configuration.
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
