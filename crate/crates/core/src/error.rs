use thiserror::Error;

/// Errors raised by the solver library and its ingestion helpers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{what} index {index} out of range (must be < {bound})")]
    Index {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("line {line}: {message}")]
    Ingestion { line: usize, message: String },

    #[error("search space of {size} assignments exceeds the limit of {limit}")]
    TooLarge { size: u128, limit: u128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    }
}
