//! Dense feed-forward policy networks and their post-training integer quantization.
//!
//! The float side defines the reference semantics: row-major weight matrices,
//! biases, relu/identity activations, and a fixed ascending-index summation
//! order. The integer side mirrors it with per-tensor symmetric codes, i32
//! accumulation, and multiplier+shift requantization, so a hardware simulator
//! can be checked bit-for-bit against [`QuantizedNetwork::forward_codes`].

mod error;
pub mod fxw;
mod net;
mod qnet;
mod quant;

pub use error::Error;
pub use net::{fc_forward_fp, fc_forward_layers, random_weights, Activation, LayerSpec, LayerWeights, NetworkSpec, WeightSet};
pub use qnet::{quantize_network, QuantizedLayer, QuantizedNetwork};
pub use quant::{clip_to_bits, code_max, dequantize, derive_requant, quantize, requantize, QuantizedTensor, RequantParams};

pub type Result<T> = std::result::Result<T, Error>;
