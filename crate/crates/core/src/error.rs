use std::fmt;

/// Errors reported by the simulator and its harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("{0}")]
    Domain(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("threshold bracket not found: {0}")]
    Bracket(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl fmt::Display) -> Self {
        Error::Config(msg.to_string())
    }

    pub(crate) fn domain(msg: impl fmt::Display) -> Self {
        Error::Domain(msg.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse {
                line,
                message: format!("{other:?}"),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
