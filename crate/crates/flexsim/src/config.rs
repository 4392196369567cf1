use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const PE_CHOICES: [u32; 5] = [2, 4, 8, 16, 32];
pub const LANE_CHOICES: [u32; 3] = [4, 8, 16];
pub const PRECISION_CHOICES: [u8; 2] = [4, 8];

/// Geometry and clocking of one accelerator instance.
///
/// `vector_width` is elements consumed per lane per cycle; it is a free
/// calibration knob, defaulted per precision by [`default_vector_width`].
/// Buffer sizes are per PE for weights and input, shared for the global
/// buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceleratorConfig {
    pub num_pes: u32,
    pub mac_lanes: u32,
    pub vector_width: u32,
    pub precision_bits: u8,
    pub weight_buffer_kb: u32,
    pub input_buffer_kb: u32,
    pub global_buffer_kb: u32,
    pub clock_mhz: u32,
}

/// Elements per lane per cycle: halving the precision doubles the throughput.
pub fn default_vector_width(precision_bits: u8) -> u32 {
    if precision_bits == 4 {
        16
    } else {
        8
    }
}

/// Bytes needed to store `count` codes at the given precision; 4-bit codes
/// pack two per byte.
pub fn weight_bytes(count: usize, precision_bits: u8) -> usize {
    if precision_bits == 4 {
        count.div_ceil(2)
    } else {
        count
    }
}

/// Per-PE weight buffer that holds an even share of `total_bytes`, rounded
/// up to a power of two and clamped to the supported 16 kB..1 MB range.
/// The clamp can leave the share short; the capacity check at configuration
/// time is what rejects such designs.
pub fn auto_weight_buffer_kb(total_bytes: usize, num_pes: u32) -> u32 {
    let per_pe = total_bytes.div_ceil(num_pes as usize);
    let mut kb = 16u32;
    while (kb as usize) * 1024 < per_pe && kb < 1024 {
        kb *= 2;
    }
    kb
}

impl AcceleratorConfig {
    /// Grid-point constructor: default vector width, buffers, and clock.
    pub fn grid_point(num_pes: u32, mac_lanes: u32, precision_bits: u8, weight_buffer_kb: u32) -> Result<Self> {
        let c = Self {
            num_pes,
            mac_lanes,
            vector_width: default_vector_width(precision_bits),
            precision_bits,
            weight_buffer_kb,
            input_buffer_kb: 4,
            global_buffer_kb: 4,
            clock_mhz: 300,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !PE_CHOICES.contains(&self.num_pes) {
            return Err(Error::InvalidConfig(format!("num_pes {} not in {PE_CHOICES:?}", self.num_pes)));
        }
        if !LANE_CHOICES.contains(&self.mac_lanes) {
            return Err(Error::InvalidConfig(format!("mac_lanes {} not in {LANE_CHOICES:?}", self.mac_lanes)));
        }
        if !PRECISION_CHOICES.contains(&self.precision_bits) {
            return Err(Error::InvalidConfig(format!("precision_bits {} not in {PRECISION_CHOICES:?}", self.precision_bits)));
        }
        if self.vector_width == 0 {
            return Err(Error::InvalidConfig("vector_width must be positive".into()));
        }
        if !(16..=1024).contains(&self.weight_buffer_kb) {
            return Err(Error::InvalidConfig(format!(
                "weight_buffer_kb {} outside 16..=1024",
                self.weight_buffer_kb
            )));
        }
        if self.input_buffer_kb == 0 || self.global_buffer_kb == 0 {
            return Err(Error::InvalidConfig("activation buffers must be positive".into()));
        }
        if self.clock_mhz == 0 {
            return Err(Error::InvalidConfig("clock_mhz must be positive".into()));
        }
        Ok(())
    }

    /// Stable identifier used for result ordering and CSV rows.
    pub fn config_id(&self) -> String {
        format!(
            "p{:02}_l{:02}_v{:02}_{}b",
            self.num_pes, self.mac_lanes, self.vector_width, self.precision_bits
        )
    }
}
