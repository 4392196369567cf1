use serde::{Deserialize, Serialize};

use crate::net::{fc_forward_layers, Activation, NetworkSpec, WeightSet};
use crate::quant::{clip_to_bits, code_max, derive_requant, quantize, requantize, QuantizedTensor, RequantParams};
use crate::{Error, Result};

/// One layer lowered to the integer datapath.
///
/// Weight codes carry scale `weight_scale`; input codes arrive at
/// `input_scale`; biases are pre-scaled to the accumulator's domain
/// `input_scale * weight_scale`; requantization lands the result on the
/// `output_scale` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    pub weights: QuantizedTensor,
    pub bias_q: Vec<i32>,
    pub requant: RequantParams,
    pub input_scale: f64,
    pub weight_scale: f64,
    pub output_scale: f64,
}

impl QuantizedLayer {
    /// Integer semantics for one output neuron: i32 MAC over ascending input
    /// indices, bias add, requantize, clip, activation.
    pub fn neuron_code(&self, neuron: usize, input: &[i8]) -> i8 {
        debug_assert_eq!(input.len(), self.in_dim);
        let row = &self.weights.values[neuron * self.in_dim..(neuron + 1) * self.in_dim];
        let mut acc: i64 = 0;
        for (w, x) in row.iter().zip(input) {
            acc += *w as i64 * *x as i64;
        }
        acc += self.bias_q[neuron] as i64;
        // The datapath accumulator is 32-bit; saturate like hardware would.
        let acc = acc.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
        let code = clip_to_bits(requantize(acc, &self.requant), self.weights.bits);
        match self.activation {
            Activation::Relu => code.max(0),
            Activation::Identity => code,
        }
    }
}

/// A network lowered to integer codes, with per-layer requantization factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedNetwork {
    pub bits: u8,
    pub input_scale: f64,
    pub layers: Vec<QuantizedLayer>,
}

impl QuantizedNetwork {
    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    /// Scale of the final layer's output codes.
    pub fn output_scale(&self) -> f64 {
        self.layers[self.layers.len() - 1].output_scale
    }

    /// Quantizes a float input vector onto the calibrated input grid.
    pub fn quantize_input(&self, x: &[f32]) -> Result<Vec<i8>> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape {
                context: "quantized input",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let qmax = code_max(self.bits);
        Ok(x.iter()
            .map(|&v| (v as f64 / self.input_scale).round().clamp(-qmax as f64, qmax as f64) as i8)
            .collect())
    }

    /// Reference integer forward pass over all layers.
    pub fn forward_codes(&self, input: &[i8]) -> Result<Vec<i8>> {
        if input.len() != self.input_dim() {
            return Err(Error::Shape {
                context: "forward codes input",
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let mut cur = input.to_vec();
        for layer in &self.layers {
            cur = (0..layer.out_dim).map(|j| layer.neuron_code(j, &cur)).collect();
        }
        Ok(cur)
    }

    /// Maps final-layer codes back to floats.
    pub fn dequantize_output(&self, codes: &[i8]) -> Vec<f32> {
        let s = self.output_scale();
        codes.iter().map(|&c| (c as f64 * s) as f32).collect()
    }

    /// Convenience: quantize input, run the integer network, dequantize.
    pub fn forward_fp(&self, x: &[f32]) -> Result<Vec<f32>> {
        let codes = self.forward_codes(&self.quantize_input(x)?)?;
        Ok(self.dequantize_output(&codes))
    }
}

fn max_abs(values: impl IntoIterator<Item = f32>) -> f64 {
    values.into_iter().fold(0.0f32, |m, v| m.max(v.abs())) as f64
}

/// Post-training quantization with max-abs calibration.
///
/// Weight tensors get per-tensor symmetric scales. Activation scales come
/// from float forward passes over `calibration`: the input grid from the
/// inputs themselves, each layer's output grid from its post-activation
/// values. A max-abs of zero falls back to scale 1.
pub fn quantize_network(
    spec: &NetworkSpec,
    w: &WeightSet,
    calibration: &[Vec<f32>],
    bits: u8,
) -> Result<QuantizedNetwork> {
    spec.validate()?;
    w.validate_against(spec)?;
    if calibration.is_empty() {
        return Err(Error::InvalidNetwork("calibration set is empty".into()));
    }

    let qmax = code_max(bits) as f64;
    let input_max = calibration.iter().flat_map(|x| x.iter().copied()).fold(0.0f32, |m, v| m.max(v.abs()));
    let input_scale = if input_max == 0.0 { 1.0 } else { input_max as f64 / qmax };

    // Per-layer max-abs of post-activation outputs across the calibration set.
    let mut act_max = vec![0.0f64; spec.layers.len()];
    for x in calibration {
        let acts = fc_forward_layers(spec, w, x)?;
        for (m, layer_out) in act_max.iter_mut().zip(&acts) {
            *m = m.max(max_abs(layer_out.iter().copied()));
        }
    }

    let mut layers = Vec::with_capacity(spec.layers.len());
    let mut s_in = input_scale;
    for (l, (spec_l, w_l)) in spec.layers.iter().zip(&w.layers).enumerate() {
        let weights = quantize(&w_l.weights, bits)?;
        let s_w = weights.scale;
        let s_out = if act_max[l] == 0.0 { 1.0 } else { act_max[l] / qmax };

        let ratio = s_in * s_w / s_out;
        if ratio <= 2f64.powi(-20) || ratio >= 2f64.powi(20) {
            return Err(Error::RequantRange(ratio));
        }
        let requant = derive_requant(s_in, s_w, s_out)?;

        // Biases live in the accumulator's domain.
        let bias_scale = s_in * s_w;
        let bias_q = w_l
            .bias
            .iter()
            .map(|&b| (b as f64 / bias_scale).round().clamp(i32::MIN as f64, i32::MAX as f64) as i32)
            .collect();

        layers.push(QuantizedLayer {
            in_dim: spec_l.in_dim,
            out_dim: spec_l.out_dim,
            activation: spec_l.activation,
            weights,
            bias_q,
            requant,
            input_scale: s_in,
            weight_scale: s_w,
            output_scale: s_out,
        });
        s_in = s_out;
    }

    Ok(QuantizedNetwork { bits, input_scale, layers })
}
