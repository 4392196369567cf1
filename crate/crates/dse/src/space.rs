use flexsim::{auto_weight_buffer_kb, check_residency, weight_bytes, AcceleratorConfig, LANE_CHOICES, PE_CHOICES, PRECISION_CHOICES};
use quantnet::NetworkSpec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Objective pairs the explorer plots, both minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectivePair {
    LatencyPower,
    LatencyArea,
}

impl ObjectivePair {
    pub const ALL: [ObjectivePair; 2] = [ObjectivePair::LatencyPower, ObjectivePair::LatencyArea];
}

/// The accelerator grid to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    pub pe_choices: Vec<u32>,
    pub lane_choices: Vec<u32>,
    pub precision_choices: Vec<u8>,
    pub objective_pairs: Vec<ObjectivePair>,
}

impl Default for DesignSpace {
    /// The full published grid.
    fn default() -> Self {
        Self {
            pe_choices: PE_CHOICES.to_vec(),
            lane_choices: LANE_CHOICES.to_vec(),
            precision_choices: PRECISION_CHOICES.to_vec(),
            objective_pairs: ObjectivePair::ALL.to_vec(),
        }
    }
}

impl DesignSpace {
    pub fn validate(&self) -> Result<()> {
        if self.pe_choices.is_empty() {
            return Err(Error::EmptySpace("pe_choices"));
        }
        if self.lane_choices.is_empty() {
            return Err(Error::EmptySpace("lane_choices"));
        }
        if self.precision_choices.is_empty() {
            return Err(Error::EmptySpace("precision_choices"));
        }
        if self.objective_pairs.is_empty() {
            return Err(Error::EmptySpace("objective_pairs"));
        }
        for &p in &self.pe_choices {
            if !PE_CHOICES.contains(&p) {
                return Err(Error::IllegalChoice { what: "PE count", value: p });
            }
        }
        for &l in &self.lane_choices {
            if !LANE_CHOICES.contains(&l) {
                return Err(Error::IllegalChoice { what: "lane count", value: l });
            }
        }
        for &b in &self.precision_choices {
            if !PRECISION_CHOICES.contains(&b) {
                return Err(Error::IllegalChoice { what: "precision", value: b as u32 });
            }
        }
        Ok(())
    }
}

/// One grid point, kept even when the network cannot be made resident.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub config: AcceleratorConfig,
    pub reject_reason: Option<String>,
}

impl Candidate {
    pub fn feasible(&self) -> bool {
        self.reject_reason.is_none()
    }
}

/// Cartesian product of the space's choices with auto-sized weight buffers.
/// Grid points whose per-PE buffers cannot hold the network stay in the list
/// with their rejection reason.
pub fn enumerate(space: &DesignSpace, net: &NetworkSpec) -> Result<Vec<Candidate>> {
    space.validate()?;
    net.validate()?;
    let dims: Vec<(usize, usize)> = net.layers.iter().map(|l| (l.in_dim, l.out_dim)).collect();

    let mut out = Vec::new();
    for &bits in &space.precision_choices {
        let total_bytes = weight_bytes(net.weight_count(), bits);
        for &pes in &space.pe_choices {
            for &lanes in &space.lane_choices {
                let wb = auto_weight_buffer_kb(total_bytes, pes);
                let config = AcceleratorConfig::grid_point(pes, lanes, bits, wb)?;
                let reject_reason = check_residency(&config, &dims).err().map(|e| e.to_string());
                out.push(Candidate { config, reject_reason });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_size_matches_choice_cardinalities() {
        let net = NetworkSpec::mlp(&[16, 8, 4]).unwrap();
        let space = DesignSpace {
            pe_choices: vec![2, 4],
            lane_choices: vec![4],
            precision_choices: vec![8],
            objective_pairs: ObjectivePair::ALL.to_vec(),
        };
        assert_eq!(enumerate(&space, &net).unwrap().len(), 2);
        assert_eq!(enumerate(&DesignSpace::default(), &net).unwrap().len(), 30);
    }

    #[test]
    fn big_net_rejects_two_pe_configs_at_8_bit() {
        let net = NetworkSpec::mlp(&[160, 4096, 2048, 512, 25]).unwrap();
        let cands = enumerate(&DesignSpace::default(), &net).unwrap();
        assert_eq!(cands.len(), 30);
        for c in &cands {
            if c.config.num_pes == 2 && c.config.precision_bits == 8 {
                let reason = c.reject_reason.as_deref().unwrap();
                assert!(reason.contains("weight buffer"), "{reason}");
            }
        }
        assert!(cands.iter().any(|c| c.feasible()));
    }

    #[test]
    fn empty_choice_lists_are_rejected() {
        let net = NetworkSpec::mlp(&[16, 8, 4]).unwrap();
        let mut space = DesignSpace::default();
        space.lane_choices.clear();
        assert!(matches!(enumerate(&space, &net), Err(Error::EmptySpace("lane_choices"))));
    }

    #[test]
    fn off_grid_choices_are_rejected() {
        let mut space = DesignSpace::default();
        space.pe_choices.push(6);
        assert!(matches!(
            space.validate(),
            Err(Error::IllegalChoice { what: "PE count", value: 6 })
        ));
    }

    #[test]
    fn small_net_is_feasible_everywhere() {
        let net = NetworkSpec::mlp(&[160, 64, 25]).unwrap();
        let cands = enumerate(&DesignSpace::default(), &net).unwrap();
        assert!(cands.iter().all(|c| c.feasible()));
    }
}
