use quantnet::{NetworkSpec, WeightSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actions::{Action, ActionTable};
use crate::arena::{randomized_env, Arena, ArenaSpec};
use crate::env::{Episode, Outcome, RAY_COUNT};
use crate::mlp::{argmax, Mlp};
use crate::Result;

/// Maps observations to action indices.
pub trait Policy {
    fn act(&mut self, obs: &[f32]) -> usize;
}

/// Always takes the highest-value action of a fixed Q-network.
pub struct GreedyPolicy {
    net: Mlp,
}

impl GreedyPolicy {
    pub fn new(spec: &NetworkSpec, weights: &WeightSet) -> Result<Self> {
        Ok(Self { net: Mlp::from_weights(spec.clone(), weights.clone())? })
    }
}

impl Policy for GreedyPolicy {
    fn act(&mut self, obs: &[f32]) -> usize {
        argmax(&self.net.forward(obs))
    }
}

/// Uniform action choice; the floor any learned policy must beat.
pub struct RandomPolicy {
    rng: ChaCha8Rng,
    n_actions: usize,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), n_actions: ActionTable::standard().len() }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, _obs: &[f32]) -> usize {
        self.rng.gen_range(0..self.n_actions)
    }
}

/// Obstacle-blind oracle: yaws until the goal bearing is small, then drives
/// a speed short enough to keep the lateral miss inside the goal radius.
/// Reads only the observation, plus the arena diagonal given at build time
/// to undo the distance normalization.
pub struct ScriptedSeeker {
    diagonal_m: f64,
    table: ActionTable,
}

impl ScriptedSeeker {
    pub fn new(diagonal_m: f64) -> Self {
        Self { diagonal_m, table: ActionTable::standard() }
    }
}

impl Policy for ScriptedSeeker {
    fn act(&mut self, obs: &[f32]) -> usize {
        let dist = obs[RAY_COUNT + 4] as f64 * self.diagonal_m;
        let bearing =
            (obs[RAY_COUNT + 5] as f64).atan2(obs[RAY_COUNT + 6] as f64).to_degrees();

        let aligned = bearing.abs() <= 3.5
            || (bearing.abs() <= 45.0 && dist * bearing.to_radians().sin().abs() <= 0.5);
        if aligned {
            // Largest forward speed that cannot overshoot past the goal.
            let mut pick = 0;
            for (i, a) in self.table.actions().iter().enumerate() {
                if let Action::SetVelocity(v) = a {
                    if *v > 0.0 && *v <= dist.max(1.0) {
                        pick = i;
                    }
                }
            }
            pick
        } else {
            // Yaw leaving the smallest residual bearing.
            let mut pick = 0;
            let mut best = f64::INFINITY;
            for (i, a) in self.table.actions().iter().enumerate() {
                if let Action::YawDegrees(g) = a {
                    let residual = (bearing + g).abs();
                    if residual < best {
                        best = residual;
                        pick = i;
                    }
                }
            }
            pick
        }
    }
}

/// Aggregate rollout results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub episodes: u32,
    pub successes: u32,
    pub collisions: u32,
    pub timeouts: u32,
    pub mean_reward: f64,
    pub mean_steps: f64,
}

impl EvalSummary {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.episodes.max(1) as f64
    }
}

/// Rolls the policy through the given arenas, one episode each.
pub fn evaluate_on(policy: &mut dyn Policy, arenas: &[Arena]) -> Result<EvalSummary> {
    let mut successes = 0;
    let mut collisions = 0;
    let mut timeouts = 0;
    let mut reward_sum = 0.0;
    let mut step_sum = 0u64;
    for arena in arenas {
        let mut ep = Episode::new(arena.clone());
        while !ep.done() {
            let action = policy.act(&ep.observe());
            ep.step(action)?;
            step_sum += 1;
        }
        match ep.outcome() {
            Outcome::Goal => successes += 1,
            Outcome::Collision => collisions += 1,
            Outcome::Timeout => timeouts += 1,
            Outcome::InProgress => unreachable!("loop exits only on terminal outcomes"),
        }
        reward_sum += ep.cumulative_reward();
    }
    let n = arenas.len() as u32;
    Ok(EvalSummary {
        episodes: n,
        successes,
        collisions,
        timeouts,
        mean_reward: reward_sum / n.max(1) as f64,
        mean_steps: step_sum as f64 / n.max(1) as f64,
    })
}

/// Rolls the policy through `episodes` freshly drawn arenas; each draws its
/// obstacle count from `1..=template.obstacle_count`.
pub fn evaluate(
    policy: &mut dyn Policy,
    template: &ArenaSpec,
    episodes: u32,
    seed: u64,
) -> Result<EvalSummary> {
    template.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arenas = (0..episodes)
        .map(|_| randomized_env(template, template.goal_rule, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    evaluate_on(policy, &arenas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;

    fn empty_arena_with_margin(seed: u64) -> Arena {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (20.0, 20.0);
        let mut point =
            |m: f64| Vec2::new(rng.gen_range(m..(w - m)), rng.gen_range(m..(h - m)));
        Arena { width_m: w, height_m: h, obstacles: Vec::new(), start: point(2.0), goal: point(2.0) }
    }

    #[test]
    fn scripted_seeker_clears_every_empty_arena() {
        let arenas: Vec<Arena> = (0..25).map(empty_arena_with_margin).collect();
        let mut policy = ScriptedSeeker::new(arenas[0].diagonal_m());
        let summary = evaluate_on(&mut policy, &arenas).unwrap();
        assert_eq!(summary.successes, 25);
        assert_eq!(summary.success_rate(), 1.0);
    }

    #[test]
    fn random_policy_rarely_reaches_dense_arena_goals() {
        let template =
            ArenaSpec { width_m: 25.0, height_m: 25.0, obstacle_count: 5, ..ArenaSpec::default() };
        // Hold the obstacle count at exactly five.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let arenas: Vec<Arena> = (0..100)
            .map(|_| {
                crate::arena::generate_env(&ArenaSpec { seed: rng.gen(), ..template }).unwrap()
            })
            .collect();
        let mut policy = RandomPolicy::new(3);
        let summary = evaluate_on(&mut policy, &arenas).unwrap();
        assert!(summary.success_rate() < 0.2, "rate {}", summary.success_rate());
        assert_eq!(summary.episodes, 100);
    }

    #[test]
    fn greedy_policy_is_deterministic() {
        let spec = NetworkSpec::mlp(&[160, 8, 25]).unwrap();
        let weights = quantnet::random_weights(&spec, 2, 0.35);
        let template = ArenaSpec { width_m: 10.0, height_m: 10.0, ..ArenaSpec::default() };
        let mut a = GreedyPolicy::new(&spec, &weights).unwrap();
        let mut b = GreedyPolicy::new(&spec, &weights).unwrap();
        let ra = evaluate(&mut a, &template, 10, 8).unwrap();
        let rb = evaluate(&mut b, &template, 10, 8).unwrap();
        assert_eq!(ra, rb);
    }
}
