//! Command-line front end that trains navigation policies, prunes and
//! quantizes the strongest survivor, sweeps accelerator designs, and reports
//! a knee recommendation, with every run captured in a replayable manifest.

pub mod cli;
pub mod config;
pub mod manifest;
pub mod pipeline;
pub mod stages;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use costmodel::CostCoefficients;

pub use cli::{Cli, Command};
pub use config::{AcceleratorSection, PipelineSpec, TaskSection, TrainingSection};
pub use manifest::{Artifacts, RunManifest, StageRecord, StageStatus, MANIFEST_FILE};
pub use pipeline::{replay_context, run_pipeline};
pub use stages::{ReportDoc, RunContext};

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Resolves flags against the configuration; flags win.
fn load_context(cli: &Cli, jobs: usize) -> Result<(RunContext, PathBuf)> {
    let config_path = cli
        .config
        .as_deref()
        .ok_or_else(|| anyhow!("--config is required for this command"))?;
    let spec = PipelineSpec::load(config_path)?;
    let coefficients = match spec.coefficients_path(config_path) {
        Some(p) => CostCoefficients::load(&p)
            .with_context(|| format!("loading coefficients {}", p.display()))?,
        None => CostCoefficients::builtin(),
    };
    let base_seed = cli.seed.unwrap_or(spec.training.hyper.seed);
    let tolerance = cli.tolerance.unwrap_or(spec.accelerator.tolerance);
    let out = cli.out.clone().unwrap_or_else(|| spec.output_dir.clone());
    Ok((RunContext { spec, base_seed, jobs, tolerance, coefficients }, out))
}

/// The run directory for commands that only read artifacts.
fn resolve_out(cli: &Cli) -> Result<PathBuf> {
    if let Some(o) = &cli.out {
        return Ok(o.clone());
    }
    if let Some(c) = &cli.config {
        return Ok(PipelineSpec::load(c)?.output_dir);
    }
    bail!("pass --out (or --config) so the run directory is known");
}

fn print_knee(k: &stages::KneePick) {
    println!(
        "{}: {} — {:.3} us, {:.4} W, {:.3} mm2, {:.4} uJ, class {:?}",
        k.objectives, k.config_id, k.latency_us, k.power_w, k.area_mm2, k.energy_uj, k.vehicle_class
    );
}

fn print_report(doc: &ReportDoc) {
    let bits = doc.policy.chosen_bits.map_or("none".to_string(), |b| format!("{b}-bit"));
    println!(
        "policy: variant {} ({}), success {:.2}, deployed at {bits}",
        doc.policy.variant, doc.policy.dims, doc.policy.success_rate
    );
    for k in &doc.knees {
        print_knee(k);
    }
    if let Some(e) = &doc.min_energy {
        print_knee(e);
    }
    println!("recommendation: {} (class {:?})", doc.recommendation.config_id, doc.recommendation.vehicle_class);
}

/// Executes one parsed invocation.
pub fn run(cli: Cli) -> Result<()> {
    let jobs = cli.jobs.unwrap_or_else(default_jobs);
    if cli.jobs.is_some() {
        // The sweep's parallelism obeys --jobs; ignore a pool that already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }

    match &cli.command {
        Command::Train => {
            let (ctx, out) = load_context(&cli, jobs)?;
            let mut art = Artifacts::new(&out)?;
            let summary = stages::stage_train(&ctx, &mut art)?;
            for v in &summary.variants {
                match v.status {
                    stages::TrainStatus::Trained => println!(
                        "variant {} ({}): trained, {} episodes, zone {}",
                        v.index,
                        stages_dims(&v.dims),
                        v.episodes,
                        v.final_zone
                    ),
                    stages::TrainStatus::Diverged => println!(
                        "variant {} ({}): {}",
                        v.index,
                        stages_dims(&v.dims),
                        v.detail.as_deref().unwrap_or("diverged")
                    ),
                }
            }
        }
        Command::Evaluate => {
            let (ctx, out) = load_context(&cli, jobs)?;
            let mut art = Artifacts::new(&out)?;
            for r in stages::stage_evaluate(&ctx, &mut art)? {
                println!(
                    "variant {} ({}): success {:.2} ({}/{}), mean reward {:.1}",
                    r.variant, r.dims, r.success_rate, r.successes, r.episodes, r.mean_reward
                );
            }
        }
        Command::Filter => {
            let (ctx, out) = load_context(&cli, jobs)?;
            let mut art = Artifacts::new(&out)?;
            let kept = stages::stage_filter(&ctx, &mut art)?;
            println!(
                "kept {} polic{} at threshold {}; best is variant {} at {:.2}",
                kept.len(),
                if kept.len() == 1 { "y" } else { "ies" },
                ctx.spec.task.success_threshold,
                kept[0].variant,
                kept[0].success_rate
            );
        }
        Command::Quantize => {
            let (ctx, out) = load_context(&cli, jobs)?;
            let mut art = Artifacts::new(&out)?;
            let report = stages::stage_quantize(&ctx, &mut art)?;
            let bits = report.chosen_bits.expect("stage succeeds only with a chosen precision");
            let err = report
                .candidates
                .iter()
                .find(|c| c.bits == bits)
                .map_or(f64::NAN, |c| c.max_abs_err);
            println!(
                "deployed variant {} at {bits}-bit (max err {err:.3e}, tolerance {:.3e})",
                report.variant, report.tolerance
            );
        }
        Command::Simulate { pes, lanes } => {
            let coefficients = match &cli.config {
                Some(path) => {
                    let spec = PipelineSpec::load(path)?;
                    match spec.coefficients_path(path) {
                        Some(p) => CostCoefficients::load(&p)?,
                        None => CostCoefficients::builtin(),
                    }
                }
                None => CostCoefficients::builtin(),
            };
            let out = resolve_out(&cli)?;
            let mut art = Artifacts::new(&out)?;
            let r = stages::stage_simulate(&mut art, &coefficients, *pes, *lanes)?;
            println!(
                "{}: {} cycles (closed form {}), {:.3} us, {:.4} W, {:.3} mm2, outputs {}",
                r.config_id,
                r.cycles,
                r.closed_form_cycles,
                r.latency_us,
                r.power_w,
                r.area_mm2,
                if r.output_matches_functional_model { "match" } else { "MISMATCH" }
            );
        }
        Command::Dse => {
            let (ctx, out) = load_context(&cli, jobs)?;
            let mut art = Artifacts::new(&out)?;
            let report = stages::stage_dse(&ctx, &mut art)?;
            let feasible = report.rows.iter().filter(|r| r.metrics.is_some()).count();
            println!("swept {} grid points, {} feasible", report.rows.len(), feasible);
            for v in &report.verdicts {
                match v.max_abs_err {
                    Some(e) => println!(
                        "{}-bit verification: max err {e:.3e} — {}",
                        v.bits,
                        if v.pass { "pass" } else { "fail" }
                    ),
                    None => println!("{}-bit verification: no feasible design to probe", v.bits),
                }
            }
        }
        Command::Report => {
            let out = resolve_out(&cli)?;
            let mut art = Artifacts::new(&out)?;
            let doc = stages::stage_report(&mut art)?;
            print_report(&doc);
        }
        Command::Pipeline { from_manifest } => {
            let (ctx, out) = match from_manifest {
                Some(path) => {
                    let manifest = RunManifest::load(path)?;
                    manifest.config.validate()?;
                    let out = cli.out.clone().unwrap_or_else(|| {
                        path.parent().unwrap_or(Path::new(".")).to_path_buf()
                    });
                    (replay_context(&manifest, jobs), out)
                }
                None => load_context(&cli, jobs)?,
            };
            let (_, report) = run_pipeline(&ctx, &out)?;
            let doc = report.ok_or_else(|| anyhow!("pipeline finished without a recommendation"))?;
            print_report(&doc);
        }
    }
    Ok(())
}

fn stages_dims(dims: &[usize]) -> String {
    dims.iter().map(ToString::to_string).collect::<Vec<_>>().join("-")
}
