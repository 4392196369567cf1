use thiserror::Error;

/// Errors surfaced by network construction, quantization, and weight-file IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: expected dimension {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{context}: non-finite value encountered")]
    NonFinite { context: &'static str },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("unsupported code width {0} (supported: 4, 8)")]
    UnsupportedBits(u8),

    #[error("requantization ratio {0} does not fit a 31-bit multiplier")]
    RequantOverflow(f64),

    #[error("requantization ratio {0} outside the supported range (2^-20, 2^20)")]
    RequantRange(f64),

    #[error("weight file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
