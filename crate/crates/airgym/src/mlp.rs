use quantnet::{random_weights, Activation, NetworkSpec, WeightSet};

use crate::Result;

const BETA1: f32 = 0.9;
const BETA2: f32 = 0.999;
const ADAM_EPS: f32 = 1e-8;

/// Index of the largest value; ties resolve to the earliest index.
pub(crate) fn argmax(q: &[f32]) -> usize {
    let mut best = 0;
    for (i, v) in q.iter().enumerate() {
        if *v > q[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
struct Moments {
    w: Vec<f32>,
    b: Vec<f32>,
}

/// Float MLP over the shared network layout, trainable with squared TD error
/// on one action per sample and adaptive-moment updates.
#[derive(Debug, Clone)]
pub struct Mlp {
    spec: NetworkSpec,
    weights: WeightSet,
    m: Vec<Moments>,
    v: Vec<Moments>,
    updates: u64,
}

impl Mlp {
    /// Fan-in-scaled random initialization.
    pub fn new(spec: NetworkSpec, seed: u64, bound_factor: f32) -> Result<Self> {
        spec.validate()?;
        let weights = random_weights(&spec, seed, bound_factor);
        Self::from_weights(spec, weights)
    }

    pub fn from_weights(spec: NetworkSpec, weights: WeightSet) -> Result<Self> {
        spec.validate()?;
        weights.validate_against(&spec)?;
        let zeros = |spec: &NetworkSpec| {
            spec.layers
                .iter()
                .map(|l| Moments {
                    w: vec![0.0; l.in_dim * l.out_dim],
                    b: vec![0.0; l.out_dim],
                })
                .collect()
        };
        Ok(Self { m: zeros(&spec), v: zeros(&spec), spec, weights, updates: 0 })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn weights(&self) -> &WeightSet {
        &self.weights
    }

    pub fn into_weights(self) -> WeightSet {
        self.weights
    }

    /// Copies another network's parameters; optimizer state is kept.
    pub fn sync_from(&mut self, other: &Mlp) {
        self.weights = other.weights.clone();
    }

    /// Post-activation outputs of every layer, input first omitted.
    fn forward_acts(&self, x: &[f32]) -> Vec<Vec<f32>> {
        debug_assert_eq!(x.len(), self.spec.input_dim());
        let mut acts: Vec<Vec<f32>> = Vec::with_capacity(self.spec.layers.len());
        let mut cur = x;
        for (spec_l, w_l) in self.spec.layers.iter().zip(&self.weights.layers) {
            let mut next = Vec::with_capacity(spec_l.out_dim);
            for j in 0..spec_l.out_dim {
                let row = &w_l.weights[j * spec_l.in_dim..(j + 1) * spec_l.in_dim];
                let mut acc = 0.0f32;
                for (wv, xv) in row.iter().zip(cur) {
                    acc += wv * xv;
                }
                acc += w_l.bias[j];
                next.push(match spec_l.activation {
                    Activation::Relu => acc.max(0.0),
                    Activation::Identity => acc,
                });
            }
            acts.push(next);
            cur = acts.last().unwrap();
        }
        acts
    }

    pub fn forward(&self, x: &[f32]) -> Vec<f32> {
        self.forward_acts(x).pop().expect("validated network has layers")
    }

    /// One optimizer step on squared error over the taken actions. Each batch
    /// entry is (observation, action index, TD target). Returns the mean
    /// squared error before the update.
    pub fn train_batch(&mut self, batch: &[(&[f32], usize, f32)], lr: f32) -> f32 {
        assert!(!batch.is_empty());
        let n_layers = self.spec.layers.len();
        let mut grad: Vec<Moments> = self
            .spec
            .layers
            .iter()
            .map(|l| Moments { w: vec![0.0; l.in_dim * l.out_dim], b: vec![0.0; l.out_dim] })
            .collect();

        let mut loss_sum = 0.0f32;
        let inv_n = 1.0 / batch.len() as f32;
        for &(x, action, target) in batch {
            let acts = self.forward_acts(x);
            let q = acts[n_layers - 1][action];
            let err = q - target;
            loss_sum += err * err;

            // Seed the output gradient on the taken action only.
            let mut g = vec![0.0f32; self.spec.layers[n_layers - 1].out_dim];
            g[action] = 2.0 * err * inv_n;

            for l in (0..n_layers).rev() {
                let spec_l = self.spec.layers[l];
                let below: &[f32] = if l == 0 { x } else { &acts[l - 1] };
                let mut g_below = vec![0.0f32; spec_l.in_dim];
                let w_l = &self.weights.layers[l].weights;
                for j in 0..spec_l.out_dim {
                    let gj = g[j];
                    if gj == 0.0 {
                        continue;
                    }
                    grad[l].b[j] += gj;
                    let row = &w_l[j * spec_l.in_dim..(j + 1) * spec_l.in_dim];
                    let grow = &mut grad[l].w[j * spec_l.in_dim..(j + 1) * spec_l.in_dim];
                    for i in 0..spec_l.in_dim {
                        grow[i] += gj * below[i];
                        g_below[i] += row[i] * gj;
                    }
                }
                if l > 0 {
                    // Relu below: gradient passes only through active units.
                    for (gb, h) in g_below.iter_mut().zip(below) {
                        if *h <= 0.0 {
                            *gb = 0.0;
                        }
                    }
                }
                g = g_below;
            }
        }

        self.updates += 1;
        let bias1 = 1.0 - BETA1.powi(self.updates as i32);
        let bias2 = 1.0 - BETA2.powi(self.updates as i32);
        for (((lw, g_l), m_l), v_l) in
            self.weights.layers.iter_mut().zip(&grad).zip(&mut self.m).zip(&mut self.v)
        {
            let params = lw.weights.iter_mut().chain(lw.bias.iter_mut());
            let gs = g_l.w.iter().chain(&g_l.b);
            let ms = m_l.w.iter_mut().chain(m_l.b.iter_mut());
            let vs = v_l.w.iter_mut().chain(v_l.b.iter_mut());
            for (((param, g), m), v) in params.zip(gs).zip(ms).zip(vs) {
                *m = BETA1 * *m + (1.0 - BETA1) * g;
                *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *param -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        }
        loss_sum * inv_n
    }
}
