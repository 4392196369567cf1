use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-layer nonlinearity applied after the bias add.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

/// One fully connected layer: `out_dim x in_dim` weights plus bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

/// Architecture of a dense feed-forward network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    /// Builds a relu-hidden, identity-output network from a dimension chain.
    pub fn mlp(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidNetwork(
                "need at least an input and an output dimension".into(),
            ));
        }
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| LayerSpec {
                in_dim: w[0],
                out_dim: w[1],
                activation: if i == last { Activation::Identity } else { Activation::Relu },
            })
            .collect();
        let spec = Self { layers };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks dimension chaining and positivity.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidNetwork("no layers".into()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.in_dim == 0 || l.out_dim == 0 {
                return Err(Error::InvalidNetwork(format!("layer {i} has a zero dimension")));
            }
            if i > 0 && self.layers[i - 1].out_dim != l.in_dim {
                return Err(Error::InvalidNetwork(format!(
                    "layer {i} input {} does not chain from previous output {}",
                    l.in_dim,
                    self.layers[i - 1].out_dim
                )));
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    /// Total number of weight matrix entries, biases excluded.
    pub fn weight_count(&self) -> usize {
        self.layers.iter().map(|l| l.in_dim * l.out_dim).sum()
    }
}

/// Trained parameters for one layer; weights are row-major `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerWeights {
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

/// Trained parameters for a whole network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    pub layers: Vec<LayerWeights>,
}

impl WeightSet {
    /// Checks that shapes match `spec` and every value is finite.
    pub fn validate_against(&self, spec: &NetworkSpec) -> Result<()> {
        if self.layers.len() != spec.layers.len() {
            return Err(Error::Shape {
                context: "weight set layer count",
                expected: spec.layers.len(),
                got: self.layers.len(),
            });
        }
        for (l, (w, s)) in self.layers.iter().zip(&spec.layers).enumerate() {
            if w.weights.len() != s.in_dim * s.out_dim {
                return Err(Error::Shape {
                    context: "weight matrix length",
                    expected: s.in_dim * s.out_dim,
                    got: w.weights.len(),
                });
            }
            if w.bias.len() != s.out_dim {
                return Err(Error::Shape {
                    context: "bias length",
                    expected: s.out_dim,
                    got: w.bias.len(),
                });
            }
            if w.weights.iter().chain(&w.bias).any(|v| !v.is_finite()) {
                return Err(Error::InvalidNetwork(format!("layer {l} holds non-finite values")));
            }
        }
        Ok(())
    }
}

/// Seeded fan-in-scaled uniform weights: each layer is drawn from
/// `[-bound_factor/sqrt(in_dim), +bound_factor/sqrt(in_dim)]`.
pub fn random_weights(spec: &NetworkSpec, seed: u64, bound_factor: f32) -> WeightSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = spec
        .layers
        .iter()
        .map(|l| {
            let bound = bound_factor / (l.in_dim as f32).sqrt();
            LayerWeights {
                weights: (0..l.in_dim * l.out_dim).map(|_| rng.gen_range(-bound..=bound)).collect(),
                bias: (0..l.out_dim).map(|_| rng.gen_range(-bound..=bound)).collect(),
            }
        })
        .collect();
    WeightSet { layers }
}

fn apply_activation(act: Activation, v: f32) -> f32 {
    match act {
        Activation::Relu => v.max(0.0),
        Activation::Identity => v,
    }
}

/// Reference float forward pass. Accumulation walks input indices in
/// ascending order; the integer datapath mirrors the same order.
pub fn fc_forward_fp(spec: &NetworkSpec, w: &WeightSet, x: &[f32]) -> Result<Vec<f32>> {
    Ok(fc_forward_layers(spec, w, x)?.pop().expect("validated network has layers"))
}

/// Reference forward pass returning every layer's post-activation output.
pub fn fc_forward_layers(spec: &NetworkSpec, w: &WeightSet, x: &[f32]) -> Result<Vec<Vec<f32>>> {
    spec.validate()?;
    w.validate_against(spec)?;
    if x.len() != spec.input_dim() {
        return Err(Error::Shape {
            context: "forward input",
            expected: spec.input_dim(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "forward input" });
    }

    let mut acts = Vec::with_capacity(spec.layers.len());
    let mut cur = x.to_vec();
    for (spec_l, w_l) in spec.layers.iter().zip(&w.layers) {
        let mut next = Vec::with_capacity(spec_l.out_dim);
        for j in 0..spec_l.out_dim {
            let row = &w_l.weights[j * spec_l.in_dim..(j + 1) * spec_l.in_dim];
            let mut acc = 0.0f32;
            for (wv, xv) in row.iter().zip(&cur) {
                acc += wv * xv;
            }
            acc += w_l.bias[j];
            next.push(apply_activation(spec_l.activation, acc));
        }
        acts.push(next.clone());
        cur = next;
    }
    Ok(acts)
}
