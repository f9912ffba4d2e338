use thiserror::Error;

/// Errors raised anywhere in the geometry pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("singular jet operation: {0}")]
    Singularity(String),

    #[error("immersion condition violated at {point:?}: Gram determinant {gram_det:e}")]
    Immersion { point: Vec<f64>, gram_det: f64 },

    #[error("invalid model spec: {0}")]
    Spec(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition failed: {message} (measured {value:e})")]
    Precondition { message: String, value: f64 },

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
