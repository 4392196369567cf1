//! Pipeline stages shared by the standalone subcommands and `pipeline`.
//!
//! Every stage reads its inputs from the artifacts an earlier stage wrote, so
//! subcommands can resume a run directory at any point, and seeds are derived
//! from the base seed by fixed rules, so results never depend on the worker
//! count.

use std::fs;
use std::path::Path;

use airgym::{dqn_train, evaluate, randomized_env, ArenaSpec, Episode, GreedyPolicy, Hyper, Policy, TrainingLog};
use anyhow::{anyhow, bail, Context, Result};
use costmodel::{CostCoefficients, VehicleClass};
use dse::{run_dse, DseReport, DseRow, ObjectivePair};
use flexsim::cycles::network_cycles;
use flexsim::{auto_weight_buffer_kb, configure, weight_bytes, AcceleratorConfig};
use quantnet::{fc_forward_fp, fxw, quantize_network, NetworkSpec, QuantizedNetwork, WeightSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::PipelineSpec;
use crate::manifest::Artifacts;

pub const TRAIN_SUMMARY_FILE: &str = "train_summary.json";
pub const EVALUATION_FILE: &str = "evaluation.csv";
pub const FILTER_REPORT_FILE: &str = "filter_report.csv";
pub const CALIBRATION_FILE: &str = "calibration.json";
pub const DEPLOY_WEIGHTS_FILE: &str = "policy_deploy.fxw";
pub const QUANTIZE_REPORT_FILE: &str = "quantize_report.json";
pub const COEFFICIENTS_FILE: &str = "coefficients.json";
pub const DSE_RESULTS_FILE: &str = "dse_results.csv";
pub const DSE_REPORT_FILE: &str = "dse_report.json";
pub const REPORT_FILE: &str = "report.json";
pub const SIMULATE_REPORT_FILE: &str = "simulate_report.json";

/// States sampled for quantizer calibration.
pub const CALIBRATION_COUNT: usize = 256;

pub fn policy_file(index: usize) -> String {
    format!("policy_{index:02}.fxw")
}

pub fn train_log_file(index: usize) -> String {
    format!("train_log_{index:02}.csv")
}

fn sidecar_file(weights: &str) -> String {
    format!("{weights}.json")
}

/// Settings shared by every stage after flag and configuration resolution.
pub struct RunContext {
    pub spec: PipelineSpec,
    pub base_seed: u64,
    pub jobs: usize,
    pub tolerance: f64,
    pub coefficients: CostCoefficients,
}

pub fn variant_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

/// Disjoint from the per-variant training seeds for any sane variant count.
pub fn eval_seed(base: u64) -> u64 {
    base ^ 0x9D2C_5680_2545_F491
}

pub fn calibration_seed(base: u64) -> u64 {
    base ^ 0x5F35_6495_81C2_5DE6
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).context("serializing artifact")?;
    fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_csv_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize().collect::<std::result::Result<Vec<T>, _>>().map_err(Into::into)
}

fn dims_label(dims: &[usize]) -> String {
    dims.iter().map(ToString::to_string).collect::<Vec<_>>().join("-")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainStatus {
    Trained,
    Diverged,
}

/// One variant's training outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub index: usize,
    pub dims: Vec<usize>,
    pub seed: u64,
    pub status: TrainStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_file: Option<String>,
    pub episodes: usize,
    pub final_zone: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub variants: Vec<VariantRecord>,
}

/// Trains one policy per variant on independent seeds. A diverged variant is
/// recorded and never aborts its siblings; only zero survivors is an error.
pub fn stage_train(ctx: &RunContext, art: &mut Artifacts) -> Result<TrainSummary> {
    let template = ctx.spec.task.arena;
    let hyper = ctx.spec.training.hyper;
    let variants = &ctx.spec.training.variants;
    let wave = ctx.spec.training.parallel.unwrap_or(ctx.jobs).min(ctx.jobs).max(1);

    let mut outcomes: Vec<(usize, airgym::Result<(WeightSet, TrainingLog)>)> = Vec::new();
    let indices: Vec<usize> = (0..variants.len()).collect();
    for chunk in indices.chunks(wave) {
        let mut wave_out = std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&i| {
                    let dims = variants[i].clone();
                    let h = Hyper { seed: variant_seed(ctx.base_seed, i), ..hyper };
                    s.spawn(move || {
                        let spec = NetworkSpec::mlp(&dims).expect("variants validated at load");
                        (i, dqn_train(&template, &spec, &h))
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training thread panicked"))
                .collect::<Vec<_>>()
        });
        outcomes.append(&mut wave_out);
    }

    let mut records = Vec::new();
    for (i, res) in outcomes {
        let dims = variants[i].clone();
        let seed = variant_seed(ctx.base_seed, i);
        match res {
            Ok((weights, log)) => {
                let spec = NetworkSpec::mlp(&dims)?;
                let wfile = policy_file(i);
                fxw::save_network(&art.path(&wfile), &spec, &weights, None)?;
                art.path(&sidecar_file(&wfile));
                let lfile = train_log_file(i);
                log.write_csv(&art.path(&lfile))?;
                records.push(VariantRecord {
                    index: i,
                    dims,
                    seed,
                    status: TrainStatus::Trained,
                    detail: None,
                    weights_file: Some(wfile),
                    log_file: Some(lfile),
                    episodes: log.episodes.len(),
                    final_zone: log.final_zone(),
                });
            }
            Err(airgym::Error::Diverged { step }) => records.push(VariantRecord {
                index: i,
                dims,
                seed,
                status: TrainStatus::Diverged,
                detail: Some(format!("value estimates diverged at step {step}")),
                weights_file: None,
                log_file: None,
                episodes: 0,
                final_zone: 0,
            }),
            Err(e) => return Err(e).with_context(|| format!("training variant {i}")),
        }
    }

    let summary = TrainSummary { variants: records };
    write_json(&art.path(TRAIN_SUMMARY_FILE), &summary)?;
    if !summary.variants.iter().any(|v| v.status == TrainStatus::Trained) {
        bail!("every training variant diverged");
    }
    Ok(summary)
}

/// One policy's rollout summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub variant: usize,
    pub dims: String,
    pub episodes: u32,
    pub successes: u32,
    pub collisions: u32,
    pub timeouts: u32,
    pub success_rate: f64,
    pub mean_reward: f64,
    pub mean_steps: f64,
}

/// Rolls out every trained policy greedily on a shared arena draw.
pub fn stage_evaluate(ctx: &RunContext, art: &mut Artifacts) -> Result<Vec<EvalRow>> {
    let summary: TrainSummary = read_json(&art.existing(TRAIN_SUMMARY_FILE)?)?;
    let template = ctx.spec.task.arena;
    let episodes = ctx.spec.task.eval_episodes;
    let seed = eval_seed(ctx.base_seed);

    let mut rows = Vec::new();
    for v in summary.variants.iter().filter(|v| v.status == TrainStatus::Trained) {
        let wfile = v
            .weights_file
            .as_deref()
            .ok_or_else(|| anyhow!("trained variant {} lists no weight file", v.index))?;
        let (spec, weights, _) = fxw::load_network(&art.existing(wfile)?)?;
        let mut policy = GreedyPolicy::new(&spec, &weights)?;
        let s = evaluate(&mut policy, &template, episodes, seed)?;
        rows.push(EvalRow {
            variant: v.index,
            dims: dims_label(&v.dims),
            episodes: s.episodes,
            successes: s.successes,
            collisions: s.collisions,
            timeouts: s.timeouts,
            success_rate: s.success_rate(),
            mean_reward: s.mean_reward,
            mean_steps: s.mean_steps,
        });
    }
    if rows.is_empty() {
        bail!("no trained policies to evaluate");
    }
    write_csv_rows(&art.path(EVALUATION_FILE), &rows)?;
    Ok(rows)
}

/// Keeps rows meeting `threshold`, ordered best-first.
pub fn filter_rows(rows: &[EvalRow], threshold: f64) -> Vec<EvalRow> {
    let mut kept: Vec<EvalRow> =
        rows.iter().filter(|r| r.success_rate >= threshold).cloned().collect();
    kept.sort_by(|a, b| {
        b.success_rate
            .partial_cmp(&a.success_rate)
            .expect("rates are finite")
            .then(a.variant.cmp(&b.variant))
    });
    kept
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRow {
    pub variant: usize,
    pub dims: String,
    pub success_rate: f64,
    pub threshold: f64,
    pub kept: bool,
}

/// Prunes policies below the configured success threshold; an empty survivor
/// set is an error, reported after the pruning table is written.
pub fn stage_filter(ctx: &RunContext, art: &mut Artifacts) -> Result<Vec<EvalRow>> {
    let rows: Vec<EvalRow> = read_csv_rows(&art.existing(EVALUATION_FILE)?)?;
    let threshold = ctx.spec.task.success_threshold;
    let report: Vec<FilterRow> = rows
        .iter()
        .map(|r| FilterRow {
            variant: r.variant,
            dims: r.dims.clone(),
            success_rate: r.success_rate,
            threshold,
            kept: r.success_rate >= threshold,
        })
        .collect();
    write_csv_rows(&art.path(FILTER_REPORT_FILE), &report)?;
    let kept = filter_rows(&rows, threshold);
    if kept.is_empty() {
        let best = rows.iter().map(|r| r.success_rate).fold(0.0, f64::max);
        bail!("no policy met the success threshold {threshold}: best success rate was {best}");
    }
    Ok(kept)
}

/// States the deployed policy visits, for calibrating quantizers.
pub fn calibration_observations(
    template: &ArenaSpec,
    spec: &NetworkSpec,
    weights: &WeightSet,
    seed: u64,
    count: usize,
) -> Result<Vec<Vec<f32>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut policy = GreedyPolicy::new(spec, weights)?;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let arena = randomized_env(template, template.goal_rule, &mut rng)?;
        let mut ep = Episode::new(arena);
        out.push(ep.observe());
        while !ep.done() && out.len() < count {
            let action = policy.act(&ep.observe());
            ep.step(action)?;
            out.push(ep.observe());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionCandidate {
    pub bits: u8,
    pub max_abs_err: f64,
    pub pass: bool,
}

/// Deployment record for the quantized policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeployReport {
    pub variant: usize,
    pub dims: String,
    pub success_rate: f64,
    /// The output layer was divided by this before quantization.
    pub normalization_scale: f64,
    pub tolerance: f64,
    pub candidates: Vec<PrecisionCandidate>,
    /// Absent when every tried precision exceeded the tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_bits: Option<u8>,
}

/// Quantizes the best surviving policy, narrowest precision first.
///
/// The output layer is rescaled by the peak calibrated magnitude so the
/// quantizer sees outputs near unit scale; positive scaling preserves the
/// action ranking, so the deployed policy picks the same maneuvers.
pub fn stage_quantize(ctx: &RunContext, art: &mut Artifacts) -> Result<DeployReport> {
    let rows: Vec<EvalRow> = read_csv_rows(&art.existing(EVALUATION_FILE)?)?;
    let kept = filter_rows(&rows, ctx.spec.task.success_threshold);
    let best = kept.first().ok_or_else(|| anyhow!("no policy met the success threshold"))?;
    let (spec, weights, _) = fxw::load_network(&art.existing(&policy_file(best.variant))?)?;

    let calib = calibration_observations(
        &ctx.spec.task.arena,
        &spec,
        &weights,
        calibration_seed(ctx.base_seed),
        CALIBRATION_COUNT,
    )?;
    write_json(&art.path(CALIBRATION_FILE), &calib)?;

    let mut peak = 0f32;
    for x in &calib {
        for y in fc_forward_fp(&spec, &weights, x)? {
            peak = peak.max(y.abs());
        }
    }
    let scale = peak.max(1e-6);
    let mut deploy = weights.clone();
    let last = deploy.layers.last_mut().expect("validated network has layers");
    for w in &mut last.weights {
        *w /= scale;
    }
    for b in &mut last.bias {
        *b /= scale;
    }

    let mut candidates = Vec::new();
    let mut chosen: Option<(u8, QuantizedNetwork)> = None;
    for bits in [4u8, 8] {
        let q = quantize_network(&spec, &deploy, &calib, bits)?;
        let mut max_err = 0f64;
        for x in &calib {
            let reference = fc_forward_fp(&spec, &deploy, x)?;
            let approx = q.forward_fp(x)?;
            for (a, r) in approx.iter().zip(&reference) {
                max_err = max_err.max((f64::from(*a) - f64::from(*r)).abs());
            }
        }
        let pass = max_err <= ctx.tolerance;
        candidates.push(PrecisionCandidate { bits, max_abs_err: max_err, pass });
        if pass {
            chosen = Some((bits, q));
            break;
        }
    }

    let report = DeployReport {
        variant: best.variant,
        dims: best.dims.clone(),
        success_rate: best.success_rate,
        normalization_scale: f64::from(scale),
        tolerance: ctx.tolerance,
        candidates,
        chosen_bits: chosen.as_ref().map(|(b, _)| *b),
    };
    write_json(&art.path(QUANTIZE_REPORT_FILE), &report)?;

    let Some((_, qnet)) = chosen else {
        let detail: Vec<String> = report
            .candidates
            .iter()
            .map(|c| format!("{}-bit max err {:.3e}", c.bits, c.max_abs_err))
            .collect();
        bail!(
            "quantization exceeded the tolerance {} at every precision: {}",
            ctx.tolerance,
            detail.join(", ")
        );
    };
    fxw::save_network(&art.path(DEPLOY_WEIGHTS_FILE), &spec, &deploy, Some(&qnet))?;
    art.path(&sidecar_file(DEPLOY_WEIGHTS_FILE));
    Ok(report)
}

/// Sweeps the accelerator grid for the deployed policy.
pub fn stage_dse(ctx: &RunContext, art: &mut Artifacts) -> Result<DseReport> {
    let (spec, deploy, manifest) = fxw::load_network(&art.existing(DEPLOY_WEIGHTS_FILE)?)?;
    if manifest.quantization.is_none() {
        bail!("deployed network carries no quantization parameters; run quantize first");
    }
    let calib: Vec<Vec<f32>> = read_json(&art.existing(CALIBRATION_FILE)?)?;
    let report = run_dse(
        &ctx.spec.accelerator.space,
        &spec,
        &deploy,
        &calib,
        &ctx.coefficients,
        ctx.tolerance,
    )?;
    ctx.coefficients.save(&art.path(COEFFICIENTS_FILE))?;
    dse::write_csv(&report, &art.path(DSE_RESULTS_FILE))?;
    write_json(&art.path(DSE_REPORT_FILE), &report)?;
    for svg in dse::write_scatter_svgs(&report, art.out_dir())? {
        if let Some(name) = svg.file_name().and_then(|s| s.to_str()) {
            art.path(name);
        }
    }
    Ok(report)
}

/// One selected design with its costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KneePick {
    pub objectives: String,
    pub config_id: String,
    pub latency_us: f64,
    pub power_w: f64,
    pub area_mm2: f64,
    pub energy_uj: f64,
    pub vehicle_class: VehicleClass,
}

fn pick_from_row(row: &DseRow, objectives: &str) -> KneePick {
    let m = row.metrics.as_ref().expect("selected rows carry metrics");
    KneePick {
        objectives: objectives.to_string(),
        config_id: m.config_id.clone(),
        latency_us: m.latency_us,
        power_w: m.power_w,
        area_mm2: m.area_mm2,
        energy_uj: m.energy_uj,
        vehicle_class: m.vehicle_class,
    }
}

/// Final run summary: the deployed policy and the recommended designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub schema_version: u32,
    pub policy: DeployReport,
    pub knees: Vec<KneePick>,
    /// Lowest latency-power product among feasible designs. The product is a
    /// screening proxy only: it charges the full power draw for exactly one
    /// inference and ignores idle intervals and memory traffic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_energy: Option<KneePick>,
    /// The latency-power knee: the balanced pick across the swept grid.
    pub recommendation: KneePick,
}

/// Distills the sweep into the final design recommendation.
pub fn stage_report(art: &mut Artifacts) -> Result<ReportDoc> {
    let policy: DeployReport = read_json(&art.existing(QUANTIZE_REPORT_FILE)?)?;
    let dse_report: DseReport = read_json(&art.existing(DSE_REPORT_FILE)?)?;

    let mut knees = Vec::new();
    for pair in ObjectivePair::ALL {
        if !dse_report.objective_pairs.contains(&pair) {
            continue;
        }
        let label = match pair {
            ObjectivePair::LatencyPower => "latency_power",
            ObjectivePair::LatencyArea => "latency_area",
        };
        if let Some(row) = dse_report.knee_row(pair) {
            knees.push(pick_from_row(row, label));
        }
    }
    let min_energy = dse_report
        .rows
        .iter()
        .filter(|r| r.metrics.is_some())
        .min_by(|a, b| {
            let (a, b) = (a.metrics.as_ref().unwrap(), b.metrics.as_ref().unwrap());
            a.energy_uj.partial_cmp(&b.energy_uj).expect("energies are finite")
        })
        .map(|r| pick_from_row(r, "energy"));
    let recommendation = knees
        .iter()
        .find(|k| k.objectives == "latency_power")
        .or_else(|| knees.first())
        .cloned()
        .ok_or_else(|| anyhow!("no feasible design produced a knee recommendation"))?;

    let doc = ReportDoc { schema_version: 1, policy, knees, min_energy, recommendation };
    write_json(&art.path(REPORT_FILE), &doc)?;
    Ok(doc)
}

/// Cycle-level record for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub config_id: String,
    pub cycles: u64,
    pub closed_form_cycles: u64,
    pub output_matches_functional_model: bool,
    pub latency_us: f64,
    pub power_w: f64,
    pub area_mm2: f64,
    pub energy_uj: f64,
    pub vehicle_class: VehicleClass,
}

/// Runs the deployed network through the event-driven simulator on one
/// design and cross-checks the closed-form cycle count.
pub fn stage_simulate(
    art: &mut Artifacts,
    coefficients: &CostCoefficients,
    pes: u32,
    lanes: u32,
) -> Result<SimulateReport> {
    let (spec, deploy, manifest) = fxw::load_network(&art.existing(DEPLOY_WEIGHTS_FILE)?)?;
    let quant = manifest
        .quantization
        .ok_or_else(|| anyhow!("deployed network carries no quantization parameters; run quantize first"))?;
    let calib: Vec<Vec<f32>> = read_json(&art.existing(CALIBRATION_FILE)?)?;
    let qnet = quantize_network(&spec, &deploy, &calib, quant.bits)?;

    let wb = auto_weight_buffer_kb(weight_bytes(spec.weight_count(), quant.bits), pes);
    let config = AcceleratorConfig::grid_point(pes, lanes, quant.bits, wb)?;
    let mut acc = configure(config, &qnet)?;
    let input = calib.first().ok_or_else(|| anyhow!("calibration set is empty"))?;
    let codes = qnet.quantize_input(input)?;
    let result = acc.run_network(&codes)?;
    let expected = qnet.forward_codes(&codes)?;

    let dims: Vec<(usize, usize)> = spec.layers.iter().map(|l| (l.in_dim, l.out_dim)).collect();
    let closed = network_cycles(&config, &dims);
    let metrics = costmodel::evaluate(coefficients, &config, result.cycle_count);

    let report = SimulateReport {
        config_id: config.config_id(),
        cycles: result.cycle_count,
        closed_form_cycles: closed,
        output_matches_functional_model: result.output.values == expected,
        latency_us: metrics.latency_us,
        power_w: metrics.power_w,
        area_mm2: metrics.area_mm2,
        energy_uj: metrics.energy_uj,
        vehicle_class: metrics.vehicle_class,
    };
    write_json(&art.path(SIMULATE_REPORT_FILE), &report)?;
    Ok(report)
}
