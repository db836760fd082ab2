use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{field}` out of range: {reason}")]
    Domain { field: &'static str, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("under-resolved discretisation: {0}")]
    Resolution(String),

    #[error("degenerate ground state: gap {gap:e} below {threshold:e}")]
    Degenerate { gap: f64, threshold: f64 },

    #[error("solver did not reach tolerance: {0}")]
    Tolerance(String),

    #[error("numerical instability at step {step}: {detail}")]
    Instability { step: usize, detail: String },

    #[error("problem size {size} exceeds cap {cap}: {hint}")]
    Size {
        size: usize,
        cap: usize,
        hint: String,
    },

    #[error("regime violated: {0}")]
    Regime(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        field,
        reason: reason.into(),
    }
}
