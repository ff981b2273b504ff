use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input; `locus` names the line or field.
    #[error("parse error at {locus}: {message}")]
    Parse { locus: String, message: String },

    /// Well-formed input that violates an instance or argument invariant.
    #[error("invalid input: {0}")]
    Validation(String),

    /// An exhaustive routine was asked to run above its configured limit.
    #[error("{what} of size {size} exceeds the cap of {cap}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(locus: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            locus: locus.into(),
            message: message.into(),
        }
    }
}
