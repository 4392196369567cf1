//! Run configuration schema: the task, the networks to train, and the
//! accelerator grid to sweep.

use std::fs;
use std::path::{Path, PathBuf};

use airgym::{ActionTable, ArenaSpec, Hyper, OBS_LEN};
use anyhow::{bail, Context, Result};
use dse::DesignSpace;
use quantnet::NetworkSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// Navigation task the policies are trained on and judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSection {
    pub arena: ArenaSpec,
    /// Keep policies whose greedy success rate reaches this fraction.
    pub success_threshold: f64,
    /// Episodes rolled out per policy when measuring that rate.
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: u32,
}

fn default_eval_episodes() -> u32 {
    100
}

/// Network variants and the schedule they are trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSection {
    /// Full layer dimension chains, observation width through action count.
    pub variants: Vec<Vec<usize>>,
    #[serde(default)]
    pub hyper: Hyper,
    /// Simultaneous training instances; defaults to the worker count.
    #[serde(default)]
    pub parallel: Option<usize>,
}

/// Accelerator grid, deployment tolerance, and optional coefficient override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceleratorSection {
    #[serde(default)]
    pub space: DesignSpace,
    /// Largest acceptable quantized-vs-float output error at deployment.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Cost coefficients JSON, resolved relative to the configuration file;
    /// the built-in table when absent.
    #[serde(default)]
    pub coefficients: Option<PathBuf>,
}

fn default_tolerance() -> f64 {
    0.05
}

impl Default for AcceleratorSection {
    fn default() -> Self {
        Self { space: DesignSpace::default(), tolerance: default_tolerance(), coefficients: None }
    }
}

/// One run's complete configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub schema_version: u32,
    pub task: TaskSection,
    pub training: TrainingSection,
    #[serde(default)]
    pub accelerator: AcceleratorSection,
    /// Default output directory; the --out flag overrides it.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("pilot_out")
}

impl PipelineSpec {
    /// Reads, parses, and validates a configuration file, and checks that
    /// every file it references exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading configuration {}", path.display()))?;
        let spec: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing configuration {}", path.display()))?;
        spec.validate()?;
        if let Some(coeffs) = spec.coefficients_path(path) {
            if !coeffs.is_file() {
                bail!("coefficients file {} does not exist", coeffs.display());
            }
        }
        Ok(spec)
    }

    /// The coefficients path resolved relative to the configuration file.
    pub fn coefficients_path(&self, config_path: &Path) -> Option<PathBuf> {
        let raw = self.accelerator.coefficients.as_ref()?;
        if raw.is_absolute() {
            Some(raw.clone())
        } else {
            Some(config_path.parent().unwrap_or(Path::new(".")).join(raw))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema_version);
        }
        self.task.arena.validate()?;
        if !(self.task.success_threshold > 0.0 && self.task.success_threshold <= 1.0) {
            bail!("success threshold {} must lie in (0, 1]", self.task.success_threshold);
        }
        if self.task.eval_episodes == 0 {
            bail!("eval episode count must be positive");
        }
        if self.training.variants.is_empty() {
            bail!("at least one network variant is required");
        }
        let actions = ActionTable::standard().len();
        for (i, dims) in self.training.variants.iter().enumerate() {
            let net = NetworkSpec::mlp(dims)
                .with_context(|| format!("network variant {i} is not a valid layer chain"))?;
            if net.input_dim() != OBS_LEN {
                bail!("network variant {i} consumes {} inputs, observations have {OBS_LEN}", net.input_dim());
            }
            if net.output_dim() != actions {
                bail!("network variant {i} emits {} outputs, the maneuver set has {actions}", net.output_dim());
            }
        }
        if self.training.parallel == Some(0) {
            bail!("parallel instance count must be positive");
        }
        self.accelerator.space.validate()?;
        if !(self.accelerator.tolerance > 0.0) {
            bail!("tolerance {} must be positive", self.accelerator.tolerance);
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical serialization; stable across reloads.
    pub fn sha256(&self) -> Result<String> {
        let json = serde_json::to_string(self).context("serializing configuration")?;
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        Ok(format!("{:x}", h.finalize()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use airgym::GoalRule;

    fn minimal_json() -> String {
        r#"{
            "schema_version": 1,
            "task": {
                "arena": {
                    "width_m": 10.0, "height_m": 10.0, "obstacle_count": 3,
                    "seed": 0, "goal_rule": "uniform"
                },
                "success_threshold": 0.7
            },
            "training": { "variants": [[160, 64, 64, 25]] }
        }"#
        .to_string()
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let spec: PipelineSpec = serde_json::from_str(&minimal_json()).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.task.eval_episodes, 100);
        assert_eq!(spec.accelerator.tolerance, 0.05);
        assert_eq!(spec.accelerator.space, DesignSpace::default());
        assert_eq!(spec.output_dir, PathBuf::from("pilot_out"));
        assert!(matches!(spec.task.arena.goal_rule, GoalRule::Uniform));
    }

    #[test]
    fn bad_sections_are_rejected() {
        let mut spec: PipelineSpec = serde_json::from_str(&minimal_json()).unwrap();
        spec.task.success_threshold = 0.0;
        assert!(spec.validate().is_err());

        let mut spec: PipelineSpec = serde_json::from_str(&minimal_json()).unwrap();
        spec.training.variants = vec![];
        assert!(spec.validate().is_err());

        let mut spec: PipelineSpec = serde_json::from_str(&minimal_json()).unwrap();
        spec.training.variants = vec![vec![160, 64, 24]];
        assert!(spec.validate().is_err());

        let mut spec: PipelineSpec = serde_json::from_str(&minimal_json()).unwrap();
        spec.training.variants = vec![vec![32, 25]];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn hash_is_stable_across_reserialization() {
        let spec: PipelineSpec = serde_json::from_str(&minimal_json()).unwrap();
        let round: PipelineSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec.sha256().unwrap(), round.sha256().unwrap());
    }

    #[test]
    fn missing_coefficients_file_fails_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        let mut spec: PipelineSpec = serde_json::from_str(&minimal_json()).unwrap();
        spec.accelerator.coefficients = Some(PathBuf::from("nope.json"));
        fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();
        assert!(PipelineSpec::load(&path).is_err());
    }
}
