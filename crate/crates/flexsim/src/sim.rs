use quantnet::{clip_to_bits, code_max, fc_forward_fp, requantize, Activation, NetworkSpec, QuantizedNetwork, QuantizedTensor, RequantParams, WeightSet};

use crate::config::{weight_bytes, AcceleratorConfig};
use crate::trace::{Phase, TraceEvent, Unit};
use crate::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-3;

/// Geometry and datapath parameters of one layer as programmed on the array.
#[derive(Debug, Clone)]
pub struct LayerProgram {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    pub requant: RequantParams,
    pub output_scale: f64,
    /// Contiguous neuron range per PE; sizes differ by at most one and the
    /// remainder sits at the lowest indices.
    pub pe_ranges: Vec<std::ops::Range<usize>>,
}

/// Balanced contiguous split of `out_dim` neurons over `pes` units.
pub(crate) fn balanced_ranges(out_dim: usize, pes: u32) -> Vec<std::ops::Range<usize>> {
    let p = pes as usize;
    let base = out_dim / p;
    let rem = out_dim % p;
    let mut ranges = Vec::with_capacity(p);
    let mut start = 0;
    for i in 0..p {
        let len = base + usize::from(i < rem);
        ranges.push(start..start + len);
        start += len;
    }
    ranges
}

/// Checks that every PE can hold its share of every layer's weights at once.
///
/// `dims` is the per-layer `(in_dim, out_dim)` list. Matches the incremental
/// check the accelerator applies while layers are configured.
pub fn check_residency(config: &AcceleratorConfig, dims: &[(usize, usize)]) -> Result<()> {
    let budget = config.weight_buffer_kb as usize * 1024;
    let ranges: Vec<Vec<std::ops::Range<usize>>> =
        dims.iter().map(|&(_, out)| balanced_ranges(out, config.num_pes)).collect();
    for pe in 0..config.num_pes as usize {
        let mut needed = 0;
        for (layer, &(in_dim, _)) in dims.iter().enumerate() {
            needed += weight_bytes(ranges[layer][pe].len() * in_dim, config.precision_bits);
            if needed > budget {
                return Err(Error::CapacityExceeded { layer, pe: pe as u32, needed, budget });
            }
        }
    }
    Ok(())
}

/// Synchronous command/response channel; the memory-mapped host interface is
/// abstracted to this.
#[derive(Debug, Clone)]
pub enum Command {
    ConfigLayer {
        layer: usize,
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        requant: RequantParams,
        output_scale: f64,
    },
    LoadWeights {
        layer: usize,
        /// Row-major `out_dim x in_dim` codes.
        weights: Vec<i8>,
        bias: Vec<i32>,
    },
    Run {
        input: Vec<i8>,
    },
    ReadResult,
}

#[derive(Debug, Clone)]
pub enum Response {
    Ack,
    Done { cycles: u64 },
    Result(QuantizedTensor),
}

struct ProgrammedLayer {
    program: LayerProgram,
    weights: Option<Vec<i8>>,
    bias: Option<Vec<i32>>,
}

/// Simulation outcome of one `Run`.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub output: QuantizedTensor,
    pub cycle_count: u64,
    pub trace: Vec<TraceEvent>,
    pub irq_raised: bool,
}

/// One programmed accelerator instance.
pub struct Accelerator {
    config: AcceleratorConfig,
    layers: Vec<ProgrammedLayer>,
    result: Option<Vec<i8>>,
    irq: bool,
    trace: Vec<TraceEvent>,
    clock: u64,
}

impl Accelerator {
    pub fn new(config: AcceleratorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            layers: Vec::new(),
            result: None,
            irq: false,
            trace: Vec::new(),
            clock: 0,
        })
    }

    pub fn config(&self) -> &AcceleratorConfig {
        &self.config
    }

    pub fn irq_raised(&self) -> bool {
        self.irq
    }

    /// Busy intervals recorded since the last `Run` started.
    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    /// Executes one host command.
    pub fn execute(&mut self, cmd: Command) -> Result<Response> {
        match cmd {
            Command::ConfigLayer { layer, in_dim, out_dim, activation, requant, output_scale } => {
                self.config_layer(layer, in_dim, out_dim, activation, requant, output_scale)?;
                Ok(Response::Ack)
            }
            Command::LoadWeights { layer, weights, bias } => {
                self.load_weights(layer, weights, bias)?;
                Ok(Response::Ack)
            }
            Command::Run { input } => {
                let result = self.run_network(&input)?;
                Ok(Response::Done { cycles: result.cycle_count })
            }
            Command::ReadResult => {
                let codes = self.result.clone().ok_or_else(|| Error::Protocol("READ_RESULT before a completed RUN".into()))?;
                let last = self.layers.last().expect("result implies layers");
                Ok(Response::Result(QuantizedTensor {
                    values: codes,
                    scale: last.program.output_scale,
                    bits: self.config.precision_bits,
                }))
            }
        }
    }

    fn config_layer(
        &mut self,
        layer: usize,
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        requant: RequantParams,
        output_scale: f64,
    ) -> Result<()> {
        if layer != self.layers.len() {
            return Err(Error::Protocol(format!(
                "CONFIG_LAYER index {layer} out of order, expected {}",
                self.layers.len()
            )));
        }
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidConfig(format!("layer {layer} has a zero dimension")));
        }
        if let Some(prev) = self.layers.last() {
            if prev.program.out_dim != in_dim {
                return Err(Error::Shape {
                    context: "layer input chaining",
                    expected: prev.program.out_dim,
                    got: in_dim,
                });
            }
        }

        let pe_ranges = balanced_ranges(out_dim, self.config.num_pes);

        // Full residency: every PE must hold all of its rows for every layer.
        let budget = self.config.weight_buffer_kb as usize * 1024;
        for (pe, range) in pe_ranges.iter().enumerate() {
            let mut needed = weight_bytes(range.len() * in_dim, self.config.precision_bits);
            for l in &self.layers {
                needed += weight_bytes(
                    l.program.pe_ranges[pe].len() * l.program.in_dim,
                    self.config.precision_bits,
                );
            }
            if needed > budget {
                return Err(Error::CapacityExceeded { layer, pe: pe as u32, needed, budget });
            }
        }

        self.layers.push(ProgrammedLayer {
            program: LayerProgram { in_dim, out_dim, activation, requant, output_scale, pe_ranges },
            weights: None,
            bias: None,
        });
        Ok(())
    }

    fn load_weights(&mut self, layer: usize, weights: Vec<i8>, bias: Vec<i32>) -> Result<()> {
        let qmax = code_max(self.config.precision_bits) as i8;
        let l = self
            .layers
            .get_mut(layer)
            .ok_or_else(|| Error::Protocol(format!("LOAD_WEIGHTS for unconfigured layer {layer}")))?;
        if weights.len() != l.program.in_dim * l.program.out_dim {
            return Err(Error::Shape {
                context: "weight payload",
                expected: l.program.in_dim * l.program.out_dim,
                got: weights.len(),
            });
        }
        if bias.len() != l.program.out_dim {
            return Err(Error::Shape {
                context: "bias payload",
                expected: l.program.out_dim,
                got: bias.len(),
            });
        }
        if weights.iter().any(|&w| w < -qmax || w > qmax) {
            return Err(Error::Protocol(format!(
                "weight code outside the {}-bit symmetric range",
                self.config.precision_bits
            )));
        }
        l.weights = Some(weights);
        l.bias = Some(bias);
        Ok(())
    }

    /// Runs one layer at the current clock, extending the trace.
    ///
    /// Compute: each PE walks its rows in lane-chunk steps of
    /// `mac_lanes * vector_width` inputs per cycle, accumulating in 32 bits.
    /// Aggregate: the arbiter drains one PE per cycle in PE-index order.
    /// Broadcast: the global buffer pushes `vector_width` codes per cycle.
    pub fn run_layer(&mut self, layer: usize, input: &[i8]) -> Result<Vec<i8>> {
        let bits = self.config.precision_bits;
        let chunk = (self.config.mac_lanes * self.config.vector_width) as usize;
        let l = self
            .layers
            .get(layer)
            .ok_or_else(|| Error::Protocol(format!("RUN touches unconfigured layer {layer}")))?;
        let (weights, bias) = match (&l.weights, &l.bias) {
            (Some(w), Some(b)) => (w, b),
            _ => return Err(Error::Protocol(format!("layer {layer} has no weights loaded"))),
        };
        let p = &l.program;
        if input.len() != p.in_dim {
            return Err(Error::Shape { context: "layer input", expected: p.in_dim, got: input.len() });
        }

        let t0 = self.clock;
        let mut out = vec![0i8; p.out_dim];
        let mut compute_end = t0;
        for (pe, range) in p.pe_ranges.iter().enumerate() {
            if range.is_empty() {
                continue;
            }
            let mut busy = 0u64;
            for j in range.clone() {
                let row = &weights[j * p.in_dim..(j + 1) * p.in_dim];
                let mut acc: i64 = 0;
                let mut i = 0;
                while i < p.in_dim {
                    let hi = (i + chunk).min(p.in_dim);
                    for k in i..hi {
                        acc += row[k] as i64 * input[k] as i64;
                    }
                    busy += 1;
                    i = hi;
                }
                acc += bias[j] as i64;
                let acc = acc.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
                let code = clip_to_bits(requantize(acc, &p.requant), bits);
                out[j] = match p.activation {
                    Activation::Relu => code.max(0),
                    Activation::Identity => code,
                };
            }
            self.trace.push(TraceEvent { start: t0, end: t0 + busy, unit: Unit::Pe(pe as u32), phase: Phase::Compute });
            compute_end = compute_end.max(t0 + busy);
        }

        let t1 = compute_end;
        let t2 = t1 + self.config.num_pes as u64;
        self.trace.push(TraceEvent { start: t1, end: t2, unit: Unit::Arbiter, phase: Phase::Aggregate });
        let t3 = t2 + (p.out_dim as u64).div_ceil(self.config.vector_width as u64);
        self.trace.push(TraceEvent { start: t2, end: t3, unit: Unit::GlobalBuffer, phase: Phase::Broadcast });
        self.clock = t3;
        Ok(out)
    }

    /// Runs every configured layer in sequence and raises the IRQ.
    pub fn run_network(&mut self, input: &[i8]) -> Result<SimResult> {
        if self.layers.is_empty() {
            return Err(Error::Protocol("RUN with no layers configured".into()));
        }
        self.clock = 0;
        self.trace.clear();
        self.irq = false;
        self.result = None;

        let mut cur = input.to_vec();
        for i in 0..self.layers.len() {
            cur = self.run_layer(i, &cur)?;
        }
        self.irq = true;
        self.result = Some(cur.clone());
        let last = self.layers.last().expect("checked non-empty");
        Ok(SimResult {
            output: QuantizedTensor {
                values: cur,
                scale: last.program.output_scale,
                bits: self.config.precision_bits,
            },
            cycle_count: self.clock,
            trace: self.trace.clone(),
            irq_raised: self.irq,
        })
    }

    /// Per-layer `(in_dim, out_dim)` pairs of the programmed network.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| (l.program.in_dim, l.program.out_dim)).collect()
    }
}

/// Programs a quantized network onto a fresh accelerator through the command
/// channel.
pub fn configure(config: AcceleratorConfig, qnet: &QuantizedNetwork) -> Result<Accelerator> {
    if qnet.bits != config.precision_bits {
        return Err(Error::PrecisionMismatch { network_bits: qnet.bits, config_bits: config.precision_bits });
    }
    let mut acc = Accelerator::new(config)?;
    for (i, l) in qnet.layers.iter().enumerate() {
        acc.execute(Command::ConfigLayer {
            layer: i,
            in_dim: l.in_dim,
            out_dim: l.out_dim,
            activation: l.activation,
            requant: l.requant,
            output_scale: l.output_scale,
        })?;
        acc.execute(Command::LoadWeights {
            layer: i,
            weights: l.weights.values.clone(),
            bias: l.bias_q.clone(),
        })?;
    }
    Ok(acc)
}

/// Verification verdict for a quantized network on one configuration.
#[derive(Debug, Clone, Copy)]
pub struct VerifyReport {
    pub max_abs_err: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub inputs_checked: usize,
}

/// Runs the accelerator over `inputs` and compares dequantized outputs
/// against the float reference.
pub fn verify_against_reference(
    qnet: &QuantizedNetwork,
    config: AcceleratorConfig,
    spec: &NetworkSpec,
    w: &WeightSet,
    inputs: &[Vec<f32>],
    tolerance: f64,
) -> Result<VerifyReport> {
    let mut acc = configure(config, qnet)?;
    let mut max_abs_err = 0.0f64;
    for x in inputs {
        let want = fc_forward_fp(spec, w, x)?;
        let codes = qnet.quantize_input(x)?;
        let sim = acc.run_network(&codes)?;
        let got = sim.output.dequantize();
        for (a, b) in want.iter().zip(&got) {
            max_abs_err = max_abs_err.max((*a as f64 - *b as f64).abs());
        }
    }
    Ok(VerifyReport {
        max_abs_err,
        tolerance,
        pass: max_abs_err <= tolerance,
        inputs_checked: inputs.len(),
    })
}
