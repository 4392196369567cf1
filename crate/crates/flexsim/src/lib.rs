//! Cycle-level model of a configurable DNN accelerator: parallel PEs with
//! vector MAC lanes, an arbiter that drains partial results in PE order, and
//! a global buffer that broadcasts each layer's activations back to the PEs.
//!
//! The functional datapath reuses the integer primitives from `quantnet`, so
//! simulated output codes are bit-identical to the reference integer forward
//! pass regardless of PE count, lane count, or vector width. Timing comes
//! from an event-driven walk of the same work, and must agree exactly with
//! the closed-form cycle model in [`cycles`].

mod config;
pub mod cycles;
mod error;
mod sim;
mod trace;

pub use config::{auto_weight_buffer_kb, default_vector_width, weight_bytes, AcceleratorConfig, LANE_CHOICES, PE_CHOICES, PRECISION_CHOICES};
pub use error::Error;
pub use sim::{check_residency, configure, verify_against_reference, Accelerator, Command, LayerProgram, Response, SimResult, VerifyReport, DEFAULT_TOLERANCE};
pub use trace::{format_trace, Phase, TraceEvent, Unit};

pub type Result<T> = std::result::Result<T, Error>;
