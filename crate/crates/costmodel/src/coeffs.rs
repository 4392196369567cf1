use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const COEFFS_SCHEMA_VERSION: u32 = 1;

/// Shipped default calibration, also available as [`CostCoefficients::builtin`].
pub const DEFAULT_COEFFICIENTS_JSON: &str = include_str!("../data/default_coefficients.json");

/// One affine cost surface: `base + per_pe*P + per_lane_unit*LU + per_kb*KB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineCoeffs {
    pub base: f64,
    pub per_pe: f64,
    pub per_lane_unit: f64,
    pub per_kb: f64,
}

impl AffineCoeffs {
    pub fn eval(&self, pes: f64, lane_units: f64, kb: f64) -> f64 {
        self.base + self.per_pe * pes + self.per_lane_unit * lane_units + self.per_kb * kb
    }

    fn check(&self, what: &'static str) -> Result<()> {
        for v in [self.base, self.per_pe, self.per_lane_unit, self.per_kb] {
            if !(v >= 0.0) {
                return Err(Error::NegativeCoefficient(what));
            }
        }
        Ok(())
    }
}

/// Calibration constants for the affine power and area surfaces, fitted once
/// against published candidate orderings and frozen. All terms are referenced
/// to a 300 MHz clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostCoefficients {
    pub schema_version: u32,
    pub reference_clock_mhz: u32,
    pub power_w: AffineCoeffs,
    pub area_mm2: AffineCoeffs,
}

impl CostCoefficients {
    /// The shipped calibration, as a compile-time constant.
    pub fn builtin() -> Self {
        Self {
            schema_version: COEFFS_SCHEMA_VERSION,
            reference_clock_mhz: 300,
            power_w: AffineCoeffs { base: 0.0167, per_pe: 0.002, per_lane_unit: 0.00183, per_kb: 2e-6 },
            area_mm2: AffineCoeffs { base: 0.674, per_pe: 0.06, per_lane_unit: 0.0588, per_kb: 2e-4 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != COEFFS_SCHEMA_VERSION {
            return Err(Error::SchemaVersion { expected: COEFFS_SCHEMA_VERSION, got: self.schema_version });
        }
        self.power_w.check("power_w")?;
        self.area_mm2.check("area_mm2")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json_string()?)?)
    }
}
