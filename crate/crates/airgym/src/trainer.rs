use std::collections::VecDeque;
use std::path::Path;

use quantnet::{NetworkSpec, WeightSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arena::{randomized_env, ArenaSpec, GoalRule};
use crate::env::{Episode, Outcome, OBS_LEN};
use crate::mlp::{argmax, Mlp};
use crate::replay::{ReplayBuffer, Transition};
use crate::{Error, Result};

/// Goal-distance bands, as diagonal fractions, for the four curriculum
/// zones; the last zone samples goals anywhere.
const ZONE_BANDS: [Option<(f64, f64)>; 4] =
    [Some((0.05, 0.25)), Some((0.15, 0.5)), Some((0.3, 0.75)), None];

/// Training rollouts are cut here and bootstrapped (`done = false`) so one
/// stalled episode cannot absorb the step budget; the environment's own
/// timeout stays authoritative everywhere else.
const TRAIN_EPISODE_CAP: u32 = 240;

/// Q-learning schedule and optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyper {
    pub total_steps: u64,
    pub gamma: f32,
    pub learning_rate: f32,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub warmup_steps: usize,
    pub target_sync_interval: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of `total_steps` over which epsilon anneals linearly.
    pub epsilon_decay_fraction: f64,
    /// Rewards are multiplied by this inside TD targets so value magnitudes
    /// stay near unity; logged rewards are unscaled.
    pub reward_scale: f32,
    /// Zone advances once this many most recent episodes are tracked...
    pub zone_window: usize,
    /// ...and their success rate reaches this threshold.
    pub zone_threshold: f64,
    pub init_bound: f32,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            total_steps: 120_000,
            gamma: 0.99,
            learning_rate: 1e-4,
            batch_size: 32,
            replay_capacity: 50_000,
            warmup_steps: 1_000,
            target_sync_interval: 1_000,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.3,
            reward_scale: 1e-3,
            zone_window: 100,
            zone_threshold: 0.5,
            init_bound: 0.35,
            seed: 0,
        }
    }
}

impl Hyper {
    fn epsilon_at(&self, step: u64) -> f64 {
        let decay_steps = (self.total_steps as f64 * self.epsilon_decay_fraction).max(1.0);
        let frac = (step as f64 / decay_steps).min(1.0);
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

/// One completed training episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u32,
    pub reward: f64,
    pub cumulative_reward: f64,
    pub epsilon: f64,
    pub zone: u32,
    pub success: bool,
}

/// Episode-level training history.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    pub episodes: Vec<EpisodeRecord>,
}

impl TrainingLog {
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["episode", "reward", "cumulative_reward", "epsilon", "zone", "success"])?;
        for r in &self.episodes {
            w.write_record([
                r.episode.to_string(),
                r.reward.to_string(),
                r.cumulative_reward.to_string(),
                r.epsilon.to_string(),
                r.zone.to_string(),
                r.success.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }

    pub fn final_zone(&self) -> u32 {
        self.episodes.last().map_or(0, |r| r.zone)
    }
}

fn zone_rule(zone: usize) -> GoalRule {
    match ZONE_BANDS[zone.min(ZONE_BANDS.len() - 1)] {
        Some((lo, hi)) => GoalRule::DistanceBand { min_frac: lo, max_frac: hi },
        None => GoalRule::Uniform,
    }
}

/// Trains a Q-network against freshly generated arenas. Each episode draws
/// its obstacle count from `1..=template.obstacle_count` and its goal from
/// the active curriculum zone. Epsilon-greedy exploration anneals linearly;
/// the target network refreshes on a fixed step interval; a non-finite loss
/// aborts with an error.
pub fn dqn_train(
    template: &ArenaSpec,
    spec: &NetworkSpec,
    hyper: &Hyper,
) -> Result<(WeightSet, TrainingLog)> {
    template.validate()?;
    spec.validate().map_err(Error::Net)?;
    if spec.input_dim() != OBS_LEN {
        return Err(Error::InvalidSpec(format!(
            "policy network consumes {} inputs, observations carry {OBS_LEN}",
            spec.input_dim()
        )));
    }

    let mut online = Mlp::new(spec.clone(), hyper.seed, hyper.init_bound)?;
    let mut target = online.clone();
    let mut buf = ReplayBuffer::new(hyper.replay_capacity);
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed.wrapping_add(0x9E37_79B9_7F4A_7C15));

    let mut log = TrainingLog::default();
    let mut zone = 0usize;
    let mut window: VecDeque<bool> = VecDeque::new();
    let mut cumulative = 0.0f64;
    let mut step_count = 0u64;
    let mut episode_idx = 0u32;

    while step_count < hyper.total_steps {
        let mut ep = Episode::new(randomized_env(template, zone_rule(zone), &mut rng)?);
        if spec.output_dim() != ep.action_count() {
            return Err(Error::InvalidSpec(format!(
                "policy network emits {} values, the maneuver set has {}",
                spec.output_dim(),
                ep.action_count()
            )));
        }
        let mut obs = ep.observe();
        let mut ep_steps = 0u32;

        while !ep.done() && ep_steps < TRAIN_EPISODE_CAP && step_count < hyper.total_steps {
            let action = if rng.gen::<f64>() < hyper.epsilon_at(step_count) {
                rng.gen_range(0..ep.action_count())
            } else {
                argmax(&online.forward(&obs))
            };
            let out = ep.step(action)?;
            let next_obs = ep.observe();
            let terminal = matches!(out.outcome, Outcome::Goal | Outcome::Collision);
            buf.push(Transition {
                obs,
                action,
                reward: out.reward as f32,
                next_obs: next_obs.clone(),
                done: terminal,
            });
            obs = next_obs;
            ep_steps += 1;
            step_count += 1;

            if buf.len() >= hyper.warmup_steps.max(hyper.batch_size) {
                let samples = buf.sample(&mut rng, hyper.batch_size);
                let batch: Vec<(&[f32], usize, f32)> = samples
                    .iter()
                    .map(|t| {
                        let mut y = t.reward * hyper.reward_scale;
                        if !t.done {
                            let q_next = target.forward(&t.next_obs);
                            y += hyper.gamma * q_next.iter().copied().fold(f32::MIN, f32::max);
                        }
                        (t.obs.as_slice(), t.action, y)
                    })
                    .collect();
                let loss = online.train_batch(&batch, hyper.learning_rate);
                if !loss.is_finite() {
                    return Err(Error::Diverged { step: step_count });
                }
            }
            if step_count % hyper.target_sync_interval == 0 {
                target.sync_from(&online);
            }
        }

        if !ep.done() && step_count >= hyper.total_steps {
            break; // Step budget ran out mid-episode; drop the partial.
        }

        let success = ep.outcome() == Outcome::Goal;
        cumulative += ep.cumulative_reward();
        log.episodes.push(EpisodeRecord {
            episode: episode_idx,
            reward: ep.cumulative_reward(),
            cumulative_reward: cumulative,
            epsilon: hyper.epsilon_at(step_count),
            zone: zone as u32,
            success,
        });
        episode_idx += 1;

        if zone + 1 < ZONE_BANDS.len() {
            window.push_back(success);
            if window.len() > hyper.zone_window {
                window.pop_front();
            }
            if window.len() == hyper.zone_window {
                let rate = window.iter().filter(|s| **s).count() as f64 / window.len() as f64;
                if rate >= hyper.zone_threshold {
                    zone += 1;
                    window.clear();
                }
            }
        }
    }

    Ok((online.into_weights(), log))
}
