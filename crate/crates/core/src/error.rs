use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entry out of [-1,1] at function {row}, point {col}: {value}")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("class is not binary-valued (entries must all lie in {{0,1}} or all in {{-1,1}})")]
    NonBinaryClass,

    #[error("class has zero separation under the given measure or point set")]
    ZeroSeparation,

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} index {index} out of bounds (len {len})")]
    IndexOutOfBounds { what: &'static str, index: usize, len: usize },

    #[error("kernel is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub(crate) fn check_index(what: &'static str, index: usize, len: usize) -> Result<()> {
    if index < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfBounds { what, index, len })
    }
}
