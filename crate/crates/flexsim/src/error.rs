use thiserror::Error;

/// Errors raised while configuring or driving the accelerator model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("layer {layer} exceeds PE {pe} weight buffer: needs {needed} B, budget {budget} B")]
    CapacityExceeded {
        layer: usize,
        pe: u32,
        needed: usize,
        budget: usize,
    },

    #[error("network is {network_bits}-bit but the accelerator is configured for {config_bits}-bit")]
    PrecisionMismatch { network_bits: u8, config_bits: u8 },

    #[error("command out of order: {0}")]
    Protocol(String),

    #[error("{context}: expected length {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error(transparent)]
    Quant(#[from] quantnet::Error),
}
