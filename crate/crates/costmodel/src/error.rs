use thiserror::Error;

/// Errors raised while loading coefficients or evaluating candidates.
#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient schema version {got} unsupported, expected {expected}")]
    SchemaVersion { expected: u32, got: u32 },

    #[error("negative coefficient: {0}")]
    NegativeCoefficient(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
