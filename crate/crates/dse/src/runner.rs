use costmodel::{evaluate, CandidateMetrics, CostCoefficients};
use flexsim::{configure, verify_against_reference, AcceleratorConfig};
use quantnet::{quantize_network, NetworkSpec, QuantizedNetwork, WeightSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::pareto::{knee, pareto_front};
use crate::space::{enumerate, DesignSpace, ObjectivePair};
use crate::{Error, Result};

/// Outcome of verifying one precision's quantized network before the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionVerdict {
    pub bits: u8,
    /// None when no feasible configuration existed to verify on.
    pub max_abs_err: Option<f64>,
    pub pass: bool,
}

/// One grid point in the final report, flags resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DseRow {
    pub config: AcceleratorConfig,
    /// Present only for candidates that were actually simulated and costed.
    pub metrics: Option<CandidateMetrics>,
    pub pareto_lat_power: bool,
    pub pareto_lat_area: bool,
    pub knee_lat_power: bool,
    pub knee_lat_area: bool,
    pub reject_reason: Option<String>,
}

impl DseRow {
    pub fn feasible(&self) -> bool {
        self.metrics.is_some()
    }
}

/// Full sweep result: rows sorted by config id, per-precision verification
/// verdicts, and the hash of the coefficients that priced the candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DseReport {
    pub rows: Vec<DseRow>,
    pub verdicts: Vec<PrecisionVerdict>,
    pub objective_pairs: Vec<ObjectivePair>,
    pub coefficients_sha256: String,
    pub tolerance: f64,
}

impl DseReport {
    /// The single knee row of one objective pair, if a front exists.
    pub fn knee_row(&self, pair: ObjectivePair) -> Option<&DseRow> {
        self.rows.iter().find(|r| match pair {
            ObjectivePair::LatencyPower => r.knee_lat_power,
            ObjectivePair::LatencyArea => r.knee_lat_area,
        })
    }
}

/// Hex SHA-256 of the canonical JSON serialization of the coefficients.
pub(crate) fn coefficients_hash(coeffs: &CostCoefficients) -> Result<String> {
    let json = coeffs.to_json_string()?;
    let mut h = Sha256::new();
    h.update(json.as_bytes());
    Ok(format!("{:x}", h.finalize()))
}

/// Sweeps the design space for one trained network.
///
/// Each precision in the space is quantized against `calibration` and
/// verified on its first feasible configuration. Feasible candidates of a
/// passing precision are simulated in parallel and costed; candidates of a
/// failing precision are rejected with a verification reason. Every precision
/// failing verification is an error.
pub fn run_dse(
    space: &DesignSpace,
    net: &NetworkSpec,
    weights: &WeightSet,
    calibration: &[Vec<f32>],
    coefficients: &CostCoefficients,
    tolerance: f64,
) -> Result<DseReport> {
    coefficients.validate()?;
    let candidates = enumerate(space, net)?;

    struct Precision {
        qnet: QuantizedNetwork,
        verdict: PrecisionVerdict,
    }
    let mut precisions: Vec<Precision> = Vec::new();
    for &bits in &space.precision_choices {
        let qnet = quantize_network(net, weights, calibration, bits)?;
        let probe = candidates.iter().find(|c| c.feasible() && c.config.precision_bits == bits);
        let verdict = match probe {
            Some(c) => {
                let report =
                    verify_against_reference(&qnet, c.config, net, weights, calibration, tolerance)?;
                PrecisionVerdict { bits, max_abs_err: Some(report.max_abs_err), pass: report.pass }
            }
            None => PrecisionVerdict { bits, max_abs_err: None, pass: false },
        };
        precisions.push(Precision { qnet, verdict });
    }

    let verified = |bits: u8| precisions.iter().any(|p| p.verdict.bits == bits && p.verdict.pass);
    let any_probed = precisions.iter().any(|p| p.verdict.max_abs_err.is_some());
    if any_probed && !precisions.iter().any(|p| p.verdict.pass) {
        let detail: Vec<String> = precisions
            .iter()
            .filter_map(|p| {
                p.verdict.max_abs_err.map(|e| {
                    format!("{}-bit max err {e:.3e} > {tolerance:.3e}", p.verdict.bits)
                })
            })
            .collect();
        return Err(Error::VerificationFailed(detail.join(", ")));
    }

    // Simulate every feasible candidate of a verified precision; evaluation
    // order is irrelevant because rows are keyed by index afterwards.
    let probe_input = calibration.first().cloned().unwrap_or_default();
    let sim: Vec<(usize, CandidateMetrics)> = candidates
        .par_iter()
        .enumerate()
        .filter(|(_, c)| c.feasible() && verified(c.config.precision_bits))
        .map(|(i, c)| -> Result<(usize, CandidateMetrics)> {
            let p = precisions
                .iter()
                .find(|p| p.qnet.bits == c.config.precision_bits)
                .expect("verified precision present");
            let mut acc = configure(c.config, &p.qnet)?;
            let codes = p.qnet.quantize_input(&probe_input)?;
            let result = acc.run_network(&codes)?;
            Ok((i, evaluate(coefficients, &c.config, result.cycle_count)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<DseRow> = candidates
        .into_iter()
        .map(|c| {
            let reject_reason = match (&c.reject_reason, verified(c.config.precision_bits)) {
                (Some(r), _) => Some(r.clone()),
                (None, false) => {
                    let v = precisions
                        .iter()
                        .find(|p| p.verdict.bits == c.config.precision_bits)
                        .map(|p| p.verdict)
                        .expect("every candidate precision has a verdict");
                    Some(match v.max_abs_err {
                        Some(e) => format!(
                            "quantization verification failed: max err {e:.3e} > {tolerance:.3e}"
                        ),
                        None => "no feasible configuration to verify on".into(),
                    })
                }
                (None, true) => None,
            };
            DseRow {
                config: c.config,
                metrics: None,
                pareto_lat_power: false,
                pareto_lat_area: false,
                knee_lat_power: false,
                knee_lat_area: false,
                reject_reason,
            }
        })
        .collect();
    for (i, m) in sim {
        rows[i].metrics = Some(m);
    }
    rows.sort_by(|a, b| a.config.config_id().cmp(&b.config.config_id()));

    for &pair in &space.objective_pairs {
        mark_front_and_knee(&mut rows, pair)?;
    }

    Ok(DseReport {
        rows,
        verdicts: precisions.iter().map(|p| p.verdict).collect(),
        objective_pairs: space.objective_pairs.clone(),
        coefficients_sha256: coefficients_hash(coefficients)?,
        tolerance,
    })
}

fn mark_front_and_knee(rows: &mut [DseRow], pair: ObjectivePair) -> Result<()> {
    let pick = |m: &CandidateMetrics| match pair {
        ObjectivePair::LatencyPower => (m.latency_us, m.power_w),
        ObjectivePair::LatencyArea => (m.latency_us, m.area_mm2),
    };
    let feasible: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].metrics.is_some()).collect();
    if feasible.is_empty() {
        return Ok(());
    }
    let points: Vec<(f64, f64)> =
        feasible.iter().map(|&i| pick(rows[i].metrics.as_ref().expect("feasible"))).collect();
    let member = pareto_front(&points)?;

    let front_rows: Vec<usize> =
        feasible.iter().zip(&member).filter(|(_, &m)| m).map(|(&i, _)| i).collect();
    let front_points: Vec<(f64, f64)> =
        points.iter().zip(&member).filter(|(_, &m)| m).map(|(&p, _)| p).collect();
    let knee_row = front_rows[knee(&front_points)?];

    for (&i, &m) in feasible.iter().zip(&member) {
        match pair {
            ObjectivePair::LatencyPower => rows[i].pareto_lat_power = m,
            ObjectivePair::LatencyArea => rows[i].pareto_lat_area = m,
        }
    }
    match pair {
        ObjectivePair::LatencyPower => rows[knee_row].knee_lat_power = true,
        ObjectivePair::LatencyArea => rows[knee_row].knee_lat_area = true,
    }
    Ok(())
}
