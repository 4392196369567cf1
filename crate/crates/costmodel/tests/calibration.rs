//! The shipped coefficients must reproduce the published candidate orderings
//! and land the calibration candidates inside coarse absolute windows. These
//! are calibration checks of frozen constants, not independent validation.

use costmodel::{area_mm2, evaluate, latency_us, power_w, CandidateMetrics, CostCoefficients, VehicleClass};
use flexsim::{auto_weight_buffer_kb, cycles, weight_bytes, AcceleratorConfig};
use quantnet::NetworkSpec;

fn published_net() -> NetworkSpec {
    NetworkSpec::mlp(&[160, 4096, 2048, 512, 25]).unwrap()
}

/// The three published PE counts at 16 lanes, auto-sized buffers.
fn candidate(pes: u32, bits: u8, net: &NetworkSpec) -> AcceleratorConfig {
    let wb = auto_weight_buffer_kb(weight_bytes(net.weight_count(), bits), pes);
    AcceleratorConfig::grid_point(pes, 16, bits, wb).unwrap()
}

fn metrics(config: &AcceleratorConfig, net: &NetworkSpec) -> CandidateMetrics {
    let dims: Vec<(usize, usize)> = net.layers.iter().map(|l| (l.in_dim, l.out_dim)).collect();
    evaluate(&CostCoefficients::builtin(), config, cycles::network_cycles(config, &dims))
}

#[test]
fn frozen_eight_bit_candidate_table() {
    let net = published_net();
    let m4 = metrics(&candidate(4, 8, &net), &net);
    let m8 = metrics(&candidate(8, 8, &net), &net);
    let m32 = metrics(&candidate(32, 8, &net), &net);

    let close = |a: f64, b: f64| (a - b).abs() < 1e-6;
    assert!(close(m4.latency_us, 71.2), "{}", m4.latency_us);
    assert!(close(m8.latency_us, 37.08), "{}", m8.latency_us);
    assert!(close(m32.latency_us, 11.76), "{}", m32.latency_us);
    assert!(close(m4.power_w, 0.150052), "{}", m4.power_w);
    assert!(close(m8.power_w, 0.283396), "{}", m8.power_w);
    assert!(close(m32.power_w, 1.050692), "{}", m32.power_w);
    assert!(close(m4.area_mm2, 5.5004), "{}", m4.area_mm2);
    assert!(close(m8.area_mm2, 10.326), "{}", m8.area_mm2);
    assert!(close(m32.area_mm2, 36.0028), "{}", m32.area_mm2);
    assert_eq!(m4.vehicle_class, VehicleClass::Nano);
    assert_eq!(m32.vehicle_class, VehicleClass::Nano);
}

#[test]
fn published_orderings_hold_for_both_precisions() {
    let net = published_net();
    for bits in [8u8, 4] {
        let m4 = metrics(&candidate(4, bits, &net), &net);
        let m8 = metrics(&candidate(8, bits, &net), &net);
        let m32 = metrics(&candidate(32, bits, &net), &net);
        // Fewest PEs: cheapest and smallest. Most PEs: fastest, hottest.
        assert!(m4.power_w < m8.power_w && m8.power_w < m32.power_w, "{bits}-bit");
        assert!(m4.area_mm2 < m8.area_mm2 && m8.area_mm2 < m32.area_mm2, "{bits}-bit");
        assert!(m32.latency_us < m8.latency_us && m8.latency_us < m4.latency_us, "{bits}-bit");
    }
}

#[test]
fn calibration_extremes_sit_within_30_percent_windows() {
    let net = published_net();
    let mut lat = Vec::new();
    let mut pow = Vec::new();
    let mut area = Vec::new();
    for bits in [8u8, 4] {
        for pes in [4u32, 8, 32] {
            let m = metrics(&candidate(pes, bits, &net), &net);
            lat.push(m.latency_us);
            pow.push(m.power_w);
            area.push(m.area_mm2);
        }
    }
    let inside = |v: f64, target: f64| v >= 0.7 * target && v <= 1.3 * target;
    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    assert!(inside(min(&lat), 4.8), "{}", min(&lat));
    assert!(inside(max(&lat), 60.2), "{}", max(&lat));
    assert!(inside(min(&pow), 0.142), "{}", min(&pow));
    assert!(inside(max(&pow), 1.091), "{}", max(&pow));
    assert!(inside(min(&area), 4.9), "{}", min(&area));
    assert!(inside(max(&area), 39.2), "{}", max(&area));
}

#[test]
fn energy_dips_then_rises_with_pe_count() {
    let net = published_net();
    let m4 = metrics(&candidate(4, 8, &net), &net);
    let m8 = metrics(&candidate(8, 8, &net), &net);
    let m32 = metrics(&candidate(32, 8, &net), &net);
    assert!(m8.energy_uj < m4.energy_uj, "{} vs {}", m8.energy_uj, m4.energy_uj);
    assert!(m8.energy_uj < m32.energy_uj, "{} vs {}", m8.energy_uj, m32.energy_uj);
}

#[test]
fn power_and_area_strictly_increase_with_parallelism() {
    let coeffs = CostCoefficients::builtin();
    let base = AcceleratorConfig::grid_point(2, 4, 8, 64).unwrap();
    for (bump, label) in [
        (AcceleratorConfig { num_pes: 4, ..base }, "pes"),
        (AcceleratorConfig { mac_lanes: 8, ..base }, "lanes"),
        (AcceleratorConfig { vector_width: 16, ..base }, "vector width"),
    ] {
        assert!(power_w(&coeffs, &bump) > power_w(&coeffs, &base), "{label}");
        assert!(area_mm2(&coeffs, &bump) > area_mm2(&coeffs, &base), "{label}");
    }
}

#[test]
fn narrowing_precision_at_fixed_geometry_strictly_cuts_power_and_area() {
    let coeffs = CostCoefficients::builtin();
    let wide = AcceleratorConfig::grid_point(8, 16, 8, 256).unwrap();
    let narrow = AcceleratorConfig { precision_bits: 4, ..wide };
    assert!(power_w(&coeffs, &narrow) < power_w(&coeffs, &wide));
    assert!(area_mm2(&coeffs, &narrow) < area_mm2(&coeffs, &wide));
}

#[test]
fn latency_ordering_on_the_published_net() {
    let net = published_net();
    let fast = AcceleratorConfig::grid_point(32, 16, 8, 512).unwrap();
    let mid = AcceleratorConfig::grid_point(8, 16, 8, 1024).unwrap();
    let slow = AcceleratorConfig::grid_point(2, 4, 8, 1024).unwrap();
    assert!(latency_us(&fast, &net) < latency_us(&mid, &net));
    assert!(latency_us(&mid, &net) < latency_us(&slow, &net));
}
