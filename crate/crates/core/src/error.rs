use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("shape mismatch: expected length {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("numerical failure: {message} (residual {residual:.3e})")]
    Numerical { message: String, residual: f64 },

    #[error("assembly error in {cell}: {message}")]
    Assembly { cell: String, message: String },

    #[error("incompatible weights at vertex {vertex}: {message}")]
    Incompatible { vertex: usize, message: String },

    #[error("step size too coarse: {0}")]
    StepSize(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn numerical(message: impl Into<String>, residual: f64) -> Self {
        Error::Numerical { message: message.into(), residual }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
