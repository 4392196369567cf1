//! Run manifests: everything needed to audit or replay a pipeline run, plus
//! the artifact recorder that keeps the manifest's file list complete.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use costmodel::CostCoefficients;
use serde::{Deserialize, Serialize};

use crate::config::PipelineSpec;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

/// One stage's outcome and wall-clock cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub seconds: f64,
    pub status: StageStatus,
    /// Failure or skip explanation; absent for clean stages.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Self-contained record of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_sha256: String,
    pub base_seed: u64,
    pub variant_seeds: Vec<u64>,
    pub eval_seed: u64,
    pub calibration_seed: u64,
    pub jobs: usize,
    pub tolerance: f64,
    pub stages: Vec<StageRecord>,
    /// Every file the run wrote, relative to the output directory.
    pub artifacts: Vec<String>,
    /// True once every stage ran and the recommendation was produced.
    pub complete: bool,
    /// The resolved configuration, embedded so a replay needs no other input.
    pub config: PipelineSpec,
    /// The cost coefficients the sweep actually used.
    pub coefficients: CostCoefficients,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    /// Writes the manifest into the output directory, listing itself.
    pub fn save(&mut self, out_dir: &Path) -> Result<PathBuf> {
        if !self.artifacts.iter().any(|a| a == MANIFEST_FILE) {
            self.artifacts.push(MANIFEST_FILE.to_string());
            self.artifacts.sort();
        }
        let path = out_dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self).context("serializing manifest")?;
        fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Records every file a run emits so the manifest can list them all.
///
/// Stages obtain output paths exclusively through [`Artifacts::path`], which
/// keeps the recorded set and the directory contents in lockstep.
pub struct Artifacts {
    out_dir: PathBuf,
    files: BTreeSet<String>,
}

impl Artifacts {
    pub fn new(out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        Ok(Self { out_dir: out_dir.to_path_buf(), files: BTreeSet::new() })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Records `rel` as an emitted file and returns its absolute path.
    pub fn path(&mut self, rel: &str) -> PathBuf {
        self.files.insert(rel.to_string());
        self.out_dir.join(rel)
    }

    /// The absolute path of an artifact some earlier stage wrote.
    pub fn existing(&self, rel: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(rel);
        if !path.is_file() {
            anyhow::bail!("missing {} in {}; run the earlier stages first", rel, self.out_dir.display());
        }
        Ok(path)
    }

    /// Every recorded file, sorted.
    pub fn files(&self) -> Vec<String> {
        self.files.iter().cloned().collect()
    }
}
