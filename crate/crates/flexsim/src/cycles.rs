//! Closed-form cycle model. The event-driven simulation must agree with
//! these formulas exactly; the pairing is checked in tests.

use crate::config::AcceleratorConfig;

/// Cycle breakdown for one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerCycles {
    /// Widest PE's MAC work: `ceil(out/P) * ceil(in/(L*V))`.
    pub compute: u64,
    /// Arbiter drain (one PE per cycle) plus global-buffer broadcast:
    /// `P + ceil(out/V)`.
    pub sync: u64,
}

impl LayerCycles {
    pub fn total(&self) -> u64 {
        self.compute + self.sync
    }
}

/// Cycles for a single `in_dim -> out_dim` layer on `config`.
pub fn layer_cycles(config: &AcceleratorConfig, in_dim: usize, out_dim: usize) -> LayerCycles {
    let p = config.num_pes as u64;
    let lv = (config.mac_lanes * config.vector_width) as u64;
    let v = config.vector_width as u64;
    let (in_dim, out_dim) = (in_dim as u64, out_dim as u64);
    LayerCycles {
        compute: out_dim.div_ceil(p) * in_dim.div_ceil(lv),
        sync: p + out_dim.div_ceil(v),
    }
}

/// Total cycles for a sequence of `(in_dim, out_dim)` layers.
pub fn network_cycles(config: &AcceleratorConfig, dims: &[(usize, usize)]) -> u64 {
    dims.iter().map(|&(i, o)| layer_cycles(config, i, o).total()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pes: u32, lanes: u32, bits: u8) -> AcceleratorConfig {
        AcceleratorConfig::grid_point(pes, lanes, bits, 1024).unwrap()
    }

    #[test]
    fn published_architecture_compute_cycles_at_32x16() {
        // 160-4096-2048-512-25 at 8-bit, V=8: per-layer compute terms
        // 128*2 + 64*32 + 16*16 + 1*4 = 2564.
        let c = cfg(32, 16, 8);
        let dims = [(160, 4096), (4096, 2048), (2048, 512), (512, 25)];
        let compute: u64 = dims.iter().map(|&(i, o)| layer_cycles(&c, i, o).compute).sum();
        assert_eq!(compute, 2564);
        assert_eq!(network_cycles(&c, &dims), 3528);
    }

    #[test]
    fn named_candidate_totals() {
        let dims = [(160, 4096), (4096, 2048), (2048, 512), (512, 25)];
        assert_eq!(network_cycles(&cfg(8, 16, 8), &dims), 11124);
        assert_eq!(network_cycles(&cfg(4, 16, 8), &dims), 21360);
        assert_eq!(network_cycles(&cfg(32, 16, 4), &dims), 1828);
        assert_eq!(network_cycles(&cfg(8, 16, 4), &dims), 5578);
        assert_eq!(network_cycles(&cfg(4, 16, 4), &dims), 10688);
    }

    #[test]
    fn compute_cycles_monotone_in_pes_and_lane_width() {
        let dims = (300, 500);
        let mut prev = u64::MAX;
        for pes in [2u32, 4, 8, 16, 32] {
            let c = cfg(pes, 8, 8);
            let now = layer_cycles(&c, dims.0, dims.1).compute;
            assert!(now <= prev, "compute grew from {prev} to {now} at {pes} PEs");
            prev = now;
        }
        let mut prev = u64::MAX;
        for lanes in [4u32, 8, 16] {
            let c = cfg(8, lanes, 8);
            let now = layer_cycles(&c, dims.0, dims.1).compute;
            assert!(now <= prev);
            prev = now;
        }
    }

    #[test]
    fn tiny_layer_still_costs_sync() {
        let c = cfg(32, 16, 8);
        let lc = layer_cycles(&c, 1, 1);
        assert_eq!(lc.compute, 1);
        assert_eq!(lc.sync, 32 + 1);
    }
}
