use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{Rect, Vec2};
use crate::{Error, Result};

const PLACEMENT_ATTEMPTS: u32 = 10_000;

/// Where the goal may land relative to the start position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalRule {
    /// Anywhere free in the arena.
    Uniform,
    /// Start-goal distance confined to a band, as fractions of the arena
    /// diagonal. Used by the curriculum zones.
    DistanceBand { min_frac: f64, max_frac: f64 },
}

/// Seeded recipe for one arena instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArenaSpec {
    pub width_m: f64,
    pub height_m: f64,
    pub obstacle_count: u32,
    pub seed: u64,
    pub goal_rule: GoalRule,
}

impl Default for ArenaSpec {
    fn default() -> Self {
        Self {
            width_m: 25.0,
            height_m: 25.0,
            obstacle_count: 3,
            seed: 0,
            goal_rule: GoalRule::Uniform,
        }
    }
}

impl ArenaSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.width_m > 0.0) || !(self.height_m > 0.0) {
            return Err(Error::InvalidSpec("arena dimensions must be positive".into()));
        }
        if !(1..=5).contains(&self.obstacle_count) {
            return Err(Error::InvalidSpec(format!(
                "obstacle_count {} outside 1..=5",
                self.obstacle_count
            )));
        }
        if let GoalRule::DistanceBand { min_frac, max_frac } = self.goal_rule {
            if !(0.0..=1.0).contains(&min_frac) || !(min_frac..=1.0).contains(&max_frac) {
                return Err(Error::InvalidSpec(format!(
                    "distance band [{min_frac}, {max_frac}] is not an ordered sub-range of [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// One generated arena: obstacles plus an episode's start and goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub width_m: f64,
    pub height_m: f64,
    pub obstacles: Vec<Rect>,
    pub start: Vec2,
    pub goal: Vec2,
}

impl Arena {
    pub fn bounds(&self) -> Rect {
        Rect::new(Vec2::new(0.0, 0.0), Vec2::new(self.width_m, self.height_m))
    }

    pub fn diagonal_m(&self) -> f64 {
        self.width_m.hypot(self.height_m)
    }

    pub fn inside_obstacle(&self, p: Vec2) -> bool {
        self.obstacles.iter().any(|r| r.contains(p))
    }
}

fn sample_free_point(rng: &mut ChaCha8Rng, w: f64, h: f64, obstacles: &[Rect]) -> Result<Vec2> {
    for _ in 0..PLACEMENT_ATTEMPTS {
        let p = Vec2::new(rng.gen_range(0.0..w), rng.gen_range(0.0..h));
        if !obstacles.iter().any(|r| r.contains(p)) {
            return Ok(p);
        }
    }
    Err(Error::Placement(PLACEMENT_ATTEMPTS))
}

/// Draws one arena from `template` with the obstacle count resampled from
/// `1..=template.obstacle_count`, a derived seed, and the given goal rule;
/// a handful of unlucky placements are retried with fresh seeds.
pub fn randomized_env(
    template: &ArenaSpec,
    goal_rule: GoalRule,
    rng: &mut ChaCha8Rng,
) -> Result<Arena> {
    const RETRIES: u32 = 32;
    let mut last = None;
    for _ in 0..RETRIES {
        let spec = ArenaSpec {
            obstacle_count: rng.gen_range(1..=template.obstacle_count),
            seed: rng.gen(),
            goal_rule,
            ..*template
        };
        match generate_env(&spec) {
            Ok(arena) => return Ok(arena),
            Err(e @ Error::Placement(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("retry loop ran at least once"))
}

/// Builds the seeded arena: obstacles first, then a free start, then a free
/// goal honoring the requested goal rule. The start-goal line may cross
/// obstacles.
pub fn generate_env(spec: &ArenaSpec) -> Result<Arena> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = (spec.width_m, spec.height_m);

    // Obstacle side lengths span 6% to 24% of the smaller arena dimension.
    let side_lo = 0.06 * w.min(h);
    let side_hi = 0.24 * w.min(h);
    let mut obstacles = Vec::with_capacity(spec.obstacle_count as usize);
    for _ in 0..spec.obstacle_count {
        let sx = rng.gen_range(side_lo..=side_hi);
        let sy = rng.gen_range(side_lo..=side_hi);
        let x = rng.gen_range(0.0..(w - sx));
        let y = rng.gen_range(0.0..(h - sy));
        obstacles.push(Rect::new(Vec2::new(x, y), Vec2::new(x + sx, y + sy)));
    }

    let start = sample_free_point(&mut rng, w, h, &obstacles)?;
    let goal = match spec.goal_rule {
        GoalRule::Uniform => sample_free_point(&mut rng, w, h, &obstacles)?,
        GoalRule::DistanceBand { min_frac, max_frac } => {
            let diag = w.hypot(h);
            let (lo, hi) = (min_frac * diag, max_frac * diag);
            let mut found = None;
            for _ in 0..PLACEMENT_ATTEMPTS {
                let p = Vec2::new(rng.gen_range(0.0..w), rng.gen_range(0.0..h));
                let d = p.dist(start);
                if d >= lo && d <= hi && !obstacles.iter().any(|r| r.contains(p)) {
                    found = Some(p);
                    break;
                }
            }
            found.ok_or(Error::Placement(PLACEMENT_ATTEMPTS))?
        }
    };

    Ok(Arena { width_m: w, height_m: h, obstacles, start, goal })
}
