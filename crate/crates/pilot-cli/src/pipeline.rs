//! Full-run orchestration: sequential stages with timing, halting on the
//! first failure, and a manifest that captures the run either way.

use std::path::Path;
use std::time::Instant;

use anyhow::Result;

use crate::manifest::{Artifacts, RunManifest, StageRecord, StageStatus};
use crate::stages::{self, ReportDoc, RunContext};

fn run_stage<T>(
    records: &mut Vec<StageRecord>,
    failure: &mut Option<anyhow::Error>,
    name: &str,
    f: impl FnOnce() -> Result<T>,
) -> Option<T> {
    if failure.is_some() {
        records.push(StageRecord {
            name: name.into(),
            seconds: 0.0,
            status: StageStatus::Skipped,
            detail: Some("an earlier stage failed".into()),
        });
        return None;
    }
    let t0 = Instant::now();
    match f() {
        Ok(v) => {
            records.push(StageRecord {
                name: name.into(),
                seconds: t0.elapsed().as_secs_f64(),
                status: StageStatus::Ok,
                detail: None,
            });
            Some(v)
        }
        Err(e) => {
            records.push(StageRecord {
                name: name.into(),
                seconds: t0.elapsed().as_secs_f64(),
                status: StageStatus::Failed,
                detail: Some(format!("{e:#}")),
            });
            *failure = Some(e);
            None
        }
    }
}

/// Runs every stage in order and writes the manifest last, so it lists every
/// emitted file and records how far a failed run got. The error of the first
/// failed stage is returned after the manifest is on disk.
pub fn run_pipeline(ctx: &RunContext, out_dir: &Path) -> Result<(RunManifest, Option<ReportDoc>)> {
    let mut art = Artifacts::new(out_dir)?;
    let mut records: Vec<StageRecord> = Vec::new();
    let mut failure: Option<anyhow::Error> = None;

    run_stage(&mut records, &mut failure, "train", || stages::stage_train(ctx, &mut art));
    run_stage(&mut records, &mut failure, "evaluate", || stages::stage_evaluate(ctx, &mut art));
    run_stage(&mut records, &mut failure, "filter", || stages::stage_filter(ctx, &mut art));
    run_stage(&mut records, &mut failure, "quantize", || stages::stage_quantize(ctx, &mut art));
    run_stage(&mut records, &mut failure, "dse", || stages::stage_dse(ctx, &mut art));
    let report = run_stage(&mut records, &mut failure, "report", || stages::stage_report(&mut art));

    let complete = failure.is_none();
    let mut manifest = RunManifest {
        schema_version: 1,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: ctx.spec.sha256()?,
        base_seed: ctx.base_seed,
        variant_seeds: (0..ctx.spec.training.variants.len())
            .map(|i| stages::variant_seed(ctx.base_seed, i))
            .collect(),
        eval_seed: stages::eval_seed(ctx.base_seed),
        calibration_seed: stages::calibration_seed(ctx.base_seed),
        jobs: ctx.jobs,
        tolerance: ctx.tolerance,
        stages: records,
        artifacts: art.files(),
        complete,
        config: ctx.spec.clone(),
        coefficients: ctx.coefficients.clone(),
    };
    manifest.save(out_dir)?;

    match failure {
        None => Ok((manifest, report)),
        Some(e) => Err(e),
    }
}

/// Rebuilds a run context from a manifest. The replay reuses the embedded
/// configuration, seeds, tolerance, and coefficients, so only the worker
/// count may differ — and results never depend on it.
pub fn replay_context(manifest: &RunManifest, jobs: usize) -> RunContext {
    RunContext {
        spec: manifest.config.clone(),
        base_seed: manifest.base_seed,
        jobs,
        tolerance: manifest.tolerance,
        coefficients: manifest.coefficients.clone(),
    }
}
