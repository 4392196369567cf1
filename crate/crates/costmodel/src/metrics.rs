use std::fmt;

use flexsim::{cycles, AcceleratorConfig};
use quantnet::NetworkSpec;
use serde::{Deserialize, Serialize};

use crate::CostCoefficients;

/// MAC-activity scaling for narrow arithmetic.
pub fn precision_factor(bits: u8) -> f64 {
    if bits == 4 {
        0.5
    } else {
        1.0
    }
}

/// Active MAC lane units: PEs times lanes times vector width relative to the
/// 8-wide baseline, derated by precision.
pub fn lane_units(config: &AcceleratorConfig) -> f64 {
    config.num_pes as f64
        * config.mac_lanes as f64
        * (config.vector_width as f64 / 8.0)
        * precision_factor(config.precision_bits)
}

/// Total on-chip SRAM in kB: per-PE weight and input buffers plus the global
/// buffer.
pub fn total_sram_kb(config: &AcceleratorConfig) -> f64 {
    config.num_pes as f64 * (config.weight_buffer_kb + config.input_buffer_kb) as f64
        + config.global_buffer_kb as f64
}

/// Affine power estimate in watts.
pub fn power_w(coeffs: &CostCoefficients, config: &AcceleratorConfig) -> f64 {
    coeffs.power_w.eval(config.num_pes as f64, lane_units(config), total_sram_kb(config))
}

/// Affine area estimate in square millimeters.
pub fn area_mm2(coeffs: &CostCoefficients, config: &AcceleratorConfig) -> f64 {
    coeffs.area_mm2.eval(config.num_pes as f64, lane_units(config), total_sram_kb(config))
}

pub fn latency_us_from_cycles(total_cycles: u64, clock_mhz: u32) -> f64 {
    total_cycles as f64 / clock_mhz as f64
}

/// Closed-form end-to-end latency of one inference. Purely analytical; weight
/// residency is checked where weights are actually placed, not here.
pub fn latency_us(config: &AcceleratorConfig, net: &NetworkSpec) -> f64 {
    let dims: Vec<(usize, usize)> = net.layers.iter().map(|l| (l.in_dim, l.out_dim)).collect();
    latency_us_from_cycles(cycles::network_cycles(config, &dims), config.clock_mhz)
}

/// Smallest aerial-vehicle power envelope a candidate fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleClass {
    Pico,
    Nano,
    Micro,
    Std,
    /// No class: the candidate was never costed (infeasible).
    None,
}

impl VehicleClass {
    /// Budgets: pico 0.1 W, nano 5 W, micro 50 W, anything above is std.
    pub fn from_power_w(power_w: f64) -> Self {
        if power_w <= 0.1 {
            VehicleClass::Pico
        } else if power_w <= 5.0 {
            VehicleClass::Nano
        } else if power_w <= 50.0 {
            VehicleClass::Micro
        } else {
            VehicleClass::Std
        }
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VehicleClass::Pico => "pico",
            VehicleClass::Nano => "nano",
            VehicleClass::Micro => "micro",
            VehicleClass::Std => "std",
            VehicleClass::None => "none",
        };
        f.write_str(s)
    }
}

/// Full cost picture of one candidate configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateMetrics {
    pub config_id: String,
    pub latency_us: f64,
    pub power_w: f64,
    pub area_mm2: f64,
    pub energy_uj: f64,
    pub vehicle_class: VehicleClass,
}

/// Costs one candidate given its simulated or closed-form cycle count.
pub fn evaluate(coeffs: &CostCoefficients, config: &AcceleratorConfig, total_cycles: u64) -> CandidateMetrics {
    let latency_us = latency_us_from_cycles(total_cycles, config.clock_mhz);
    let power = power_w(coeffs, config);
    CandidateMetrics {
        config_id: config.config_id(),
        latency_us,
        power_w: power,
        area_mm2: area_mm2(coeffs, config),
        energy_uj: power * latency_us,
        vehicle_class: VehicleClass::from_power_w(power),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lane_units_are_precision_neutral_at_default_vector_widths() {
        let c8 = AcceleratorConfig::grid_point(4, 16, 8, 1024).unwrap();
        let c4 = AcceleratorConfig::grid_point(4, 16, 4, 1024).unwrap();
        assert_eq!(lane_units(&c8), 64.0);
        assert_eq!(lane_units(&c4), 64.0);
        assert_eq!(total_sram_kb(&c8), 4116.0);
    }

    #[test]
    fn zero_pes_and_zero_sram_reduce_to_the_base_constants() {
        let coeffs = CostCoefficients::builtin();
        let config = AcceleratorConfig {
            num_pes: 0,
            mac_lanes: 16,
            vector_width: 8,
            precision_bits: 8,
            weight_buffer_kb: 0,
            input_buffer_kb: 0,
            global_buffer_kb: 0,
            clock_mhz: 300,
        };
        assert_eq!(power_w(&coeffs, &config), coeffs.power_w.base);
        assert_eq!(area_mm2(&coeffs, &config), coeffs.area_mm2.base);
    }

    #[test]
    fn class_thresholds_sit_at_inclusive_budget_edges() {
        assert_eq!(VehicleClass::from_power_w(0.09), VehicleClass::Pico);
        assert_eq!(VehicleClass::from_power_w(0.1), VehicleClass::Pico);
        assert_eq!(VehicleClass::from_power_w(0.142), VehicleClass::Nano);
        assert_eq!(VehicleClass::from_power_w(1.091), VehicleClass::Nano);
        assert_eq!(VehicleClass::from_power_w(5.0), VehicleClass::Nano);
        assert_eq!(VehicleClass::from_power_w(50.0), VehicleClass::Micro);
        assert_eq!(VehicleClass::from_power_w(60.0), VehicleClass::Std);
    }

    #[test]
    fn class_never_shrinks_as_power_grows() {
        let mut prev = VehicleClass::Pico;
        for i in 0..2000 {
            let cls = VehicleClass::from_power_w(i as f64 * 0.06);
            assert!(cls >= prev, "{cls} after {prev}");
            prev = cls;
        }
    }

    #[test]
    fn doubling_the_clock_halves_latency() {
        let net = NetworkSpec::mlp(&[160, 64, 25]).unwrap();
        let mut config = AcceleratorConfig::grid_point(8, 8, 8, 64).unwrap();
        let slow = latency_us(&config, &net);
        config.clock_mhz *= 2;
        assert_eq!(latency_us(&config, &net), slow / 2.0);
    }

    #[test]
    fn energy_is_the_exact_power_latency_product() {
        let coeffs = CostCoefficients::builtin();
        let config = AcceleratorConfig::grid_point(8, 16, 8, 1024).unwrap();
        let m = evaluate(&coeffs, &config, 11124);
        let rel = (m.energy_uj - m.power_w * m.latency_us).abs() / m.energy_uj;
        assert!(rel <= 1e-9);
        assert!(m.latency_us > 0.0 && m.power_w > 0.0 && m.area_mm2 > 0.0 && m.energy_uj > 0.0);
    }
}
