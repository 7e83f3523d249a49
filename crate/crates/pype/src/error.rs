use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition (zero dimension,
    /// odd vector length, out-of-range index, and so on).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two inputs that must agree in shape did not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A softmax row had no unmasked entry to normalize over.
    #[error("attention row is fully masked")]
    FullyMaskedRow,

    /// Structured text (CSV, PGM, config file) failed to parse.
    /// `line` is 1-based; 0 means the failure is not tied to a line.
    #[error("parse error in {file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    /// A weight file had a bad magic, version, or truncated payload.
    #[error("malformed weight file {file}: {message}")]
    WeightFormat { file: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn parse(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }
}
