use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("numerical failure at cell (u={u}, v={v}): {what}")]
    Numerical { u: f64, v: f64, what: String },
    #[error("out of range: {0}")]
    Range(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}

impl Error {
    /// Process exit code: 1 constraint violation, 2 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn constraint(msg: impl Into<String>) -> Error {
    Error::Constraint(msg.into())
}

pub(crate) fn range(msg: impl Into<String>) -> Error {
    Error::Range(msg.into())
}
