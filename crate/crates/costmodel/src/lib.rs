//! Analytical latency, power, area and energy estimates for an accelerator
//! configuration, and the mapping from a power envelope to a vehicle class.
//!
//! Power and area are affine in PE count, active MAC lane units, and total
//! on-chip SRAM. Absolute numbers come from shipped calibration coefficients
//! and carry no silicon provenance; only orderings and coarse ranges are
//! meaningful. Latency is the closed-form cycle count divided by the clock.

mod coeffs;
mod error;
mod metrics;

pub use coeffs::{AffineCoeffs, CostCoefficients, COEFFS_SCHEMA_VERSION, DEFAULT_COEFFICIENTS_JSON};
pub use error::Error;
pub use metrics::{area_mm2, evaluate, lane_units, latency_us, latency_us_from_cycles, power_w, precision_factor, total_sram_kb, CandidateMetrics, VehicleClass};

pub type Result<T> = std::result::Result<T, Error>;
