use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::actions::{Action, ActionTable, T_MAX};
use crate::arena::Arena;
use crate::geom::{point_segment_dist, segment_rect_entry, segment_rect_exit, ray_rect_entry, ray_rect_exit, Vec2};
use crate::{Error, Result};

/// Hard episode length limit, in steps.
pub const EPISODE_STEP_CAP: u32 = 750;
/// Range sensor saturation distance.
pub const SENSE_RANGE_M: f64 = 20.0;
/// Number of range rays in the forward fan.
pub const RAY_COUNT: usize = 152;
/// Observation vector length: rays + velocity + heading + goal + time.
pub const OBS_LEN: usize = RAY_COUNT + 8;
/// Speed above which the slow-flight penalty vanishes.
pub const V_REF_M_S: f64 = 2.5;
/// Largest commanded speed magnitude; normalizes velocity features.
pub const V_CMD_MAX_M_S: f64 = 5.0;

/// Kinematic snapshot of the vehicle between actuations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Vec2,
    /// Radians, counterclockwise from +x.
    pub heading_rad: f64,
    /// Signed speed commanded on the latest step; zero after a yaw.
    pub speed_m_s: f64,
    /// Completed steps this episode.
    pub step_index: u32,
}

impl AgentState {
    /// Fresh state at the arena's start marker, facing +x at rest.
    pub fn at_start(arena: &Arena) -> Self {
        Self { position: arena.start, heading_rad: 0.0, speed_m_s: 0.0, step_index: 0 }
    }
}

/// Scoring constants for one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub goal_bonus: f64,
    pub collision_penalty: f64,
    pub step_cost: f64,
    /// Weight on the slow-flight distance deficit.
    pub hover_weight: f64,
    pub goal_radius_m: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            goal_bonus: 1000.0,
            collision_penalty: 100.0,
            step_cost: 1.0,
            hover_weight: 1.0,
            goal_radius_m: 1.0,
        }
    }
}

/// How a step left the episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    InProgress,
    Goal,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn is_terminal(self) -> bool {
        self != Outcome::InProgress
    }
}

/// Result of applying one action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub state: AgentState,
    pub reward: f64,
    pub outcome: Outcome,
}

fn wrap_angle(theta: f64) -> f64 {
    (theta + PI).rem_euclid(2.0 * PI) - PI
}

/// Range reading along one ray: nearest of arena wall and obstacle faces,
/// saturated at `SENSE_RANGE_M`.
fn ray_distance(arena: &Arena, origin: Vec2, theta: f64) -> f64 {
    let dir = Vec2::from_angle(theta);
    let mut d = ray_rect_exit(origin, dir, &arena.bounds());
    for rect in &arena.obstacles {
        if let Some(t) = ray_rect_entry(origin, dir, rect) {
            d = d.min(t);
        }
    }
    d.min(SENSE_RANGE_M)
}

/// Observation: 152 normalized ranges over a heading-centered half-circle,
/// then velocity components, heading sin/cos, normalized goal distance, goal
/// bearing sin/cos, and the remaining-step fraction. Every entry lies in
/// [-1, 1].
pub fn observe(arena: &Arena, state: &AgentState) -> Vec<f32> {
    let mut obs = Vec::with_capacity(OBS_LEN);
    let p = state.position;
    // Collision states can land a rounding error outside the walls; sensing
    // stays defined by casting from the nearest in-bounds point.
    let origin =
        Vec2::new(p.x.clamp(0.0, arena.width_m), p.y.clamp(0.0, arena.height_m));
    for k in 0..RAY_COUNT {
        let offset = -PI / 2.0 + PI * k as f64 / (RAY_COUNT - 1) as f64;
        let d = ray_distance(arena, origin, state.heading_rad + offset);
        obs.push((d / SENSE_RANGE_M) as f32);
    }
    let (sin_h, cos_h) = state.heading_rad.sin_cos();
    obs.push((state.speed_m_s * cos_h / V_CMD_MAX_M_S) as f32);
    obs.push((state.speed_m_s * sin_h / V_CMD_MAX_M_S) as f32);
    obs.push(sin_h as f32);
    obs.push(cos_h as f32);
    let to_goal = arena.goal.sub(p);
    obs.push((to_goal.len() / arena.diagonal_m()).min(1.0) as f32);
    let bearing = wrap_angle(to_goal.y.atan2(to_goal.x) - state.heading_rad);
    obs.push(bearing.sin() as f32);
    obs.push(bearing.cos() as f32);
    let remaining = EPISODE_STEP_CAP.saturating_sub(state.step_index);
    obs.push(remaining as f32 / EPISODE_STEP_CAP as f32);
    obs
}

/// Earliest fraction in [0, 1] at which the swept segment leaves the arena
/// or enters an obstacle.
fn collision_fraction(arena: &Arena, a: Vec2, b: Vec2) -> Option<f64> {
    let mut hit = segment_rect_exit(a, b, &arena.bounds());
    for rect in &arena.obstacles {
        if let Some(t) = segment_rect_entry(a, b, rect) {
            hit = Some(hit.map_or(t, |h: f64| h.min(t)));
        }
    }
    hit
}

/// Applies one action. Collision ends the step at the contact point and
/// overrides a goal crossing; reaching the goal overrides the step cap.
pub fn step(arena: &Arena, state: &AgentState, action: Action, params: &RewardParams) -> StepOutput {
    let (heading, speed) = match action {
        Action::SetVelocity(v) => (state.heading_rad, v),
        Action::YawDegrees(deg) => (wrap_angle(state.heading_rad - deg.to_radians()), 0.0),
    };
    let from = state.position;
    let target = from.add(Vec2::from_angle(heading).scale(speed * T_MAX));

    let (position, outcome) = match collision_fraction(arena, from, target) {
        Some(t) => (from.add(target.sub(from).scale(t)), Outcome::Collision),
        None if point_segment_dist(arena.goal, from, target) <= params.goal_radius_m => {
            (target, Outcome::Goal)
        }
        None if state.step_index + 1 >= EPISODE_STEP_CAP => (target, Outcome::Timeout),
        None => (target, Outcome::InProgress),
    };

    let goal_term = if outcome == Outcome::Goal { params.goal_bonus } else { 0.0 };
    let collision_term =
        if outcome == Outcome::Collision { params.collision_penalty } else { 0.0 };
    let v_now = speed.abs().min(V_REF_M_S);
    let slow_deficit = (V_REF_M_S - v_now) * T_MAX;
    let reward = goal_term
        - collision_term
        - position.dist(arena.goal)
        - params.hover_weight * slow_deficit
        - params.step_cost;

    let state = AgentState {
        position,
        heading_rad: heading,
        speed_m_s: speed,
        step_index: state.step_index + 1,
    };
    StepOutput { state, reward, outcome }
}

/// One rollout against a fixed arena; owns the evolving state.
#[derive(Debug, Clone)]
pub struct Episode {
    arena: Arena,
    table: ActionTable,
    params: RewardParams,
    state: AgentState,
    outcome: Outcome,
    cumulative_reward: f64,
}

impl Episode {
    pub fn new(arena: Arena) -> Self {
        Self::with_params(arena, RewardParams::default())
    }

    pub fn with_params(arena: Arena, params: RewardParams) -> Self {
        let state = AgentState::at_start(&arena);
        Self {
            arena,
            table: ActionTable::standard(),
            params,
            state,
            outcome: Outcome::InProgress,
            cumulative_reward: 0.0,
        }
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn state(&self) -> &AgentState {
        &self.state
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn done(&self) -> bool {
        self.outcome.is_terminal()
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.cumulative_reward
    }

    pub fn action_count(&self) -> usize {
        self.table.len()
    }

    pub fn observe(&self) -> Vec<f32> {
        observe(&self.arena, &self.state)
    }

    /// Applies the indexed action and returns the transition.
    pub fn step(&mut self, action_index: usize) -> Result<StepOutput> {
        if self.done() {
            return Err(Error::EpisodeOver);
        }
        let action = self
            .table
            .get(action_index)
            .ok_or(Error::ActionIndex { index: action_index, len: self.table.len() })?;
        let out = step(&self.arena, &self.state, action, &self.params);
        self.state = out.state;
        self.outcome = out.outcome;
        self.cumulative_reward += out.reward;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;

    fn empty_arena(w: f64, h: f64, start: Vec2, goal: Vec2) -> Arena {
        Arena { width_m: w, height_m: h, obstacles: Vec::new(), start, goal }
    }

    fn state_at(p: Vec2, heading: f64) -> AgentState {
        AgentState { position: p, heading_rad: heading, speed_m_s: 0.0, step_index: 0 }
    }

    #[test]
    fn landing_on_the_goal_at_full_speed_scores_999() {
        let arena = empty_arena(40.0, 40.0, Vec2::new(10.0, 20.0), Vec2::new(15.0, 20.0));
        let out = step(
            &arena,
            &state_at(arena.start, 0.0),
            Action::SetVelocity(5.0),
            &RewardParams::default(),
        );
        assert_eq!(out.outcome, Outcome::Goal);
        assert_eq!(out.reward, 999.0);
    }

    #[test]
    fn fast_collision_twelve_meters_out_scores_minus_113() {
        let mut arena = empty_arena(40.0, 40.0, Vec2::new(10.0, 20.0), Vec2::new(10.0, 20.0));
        arena.obstacles.push(Rect::new(Vec2::new(13.0, 15.0), Vec2::new(16.0, 25.0)));
        arena.goal = Vec2::new(1.0, 20.0);
        // Contact point (13, 20) sits 12 m from the goal at (1, 20).
        let out = step(
            &arena,
            &state_at(Vec2::new(10.0, 20.0), 0.0),
            Action::SetVelocity(5.0),
            &RewardParams::default(),
        );
        assert_eq!(out.outcome, Outcome::Collision);
        assert_eq!(out.state.position, Vec2::new(13.0, 20.0));
        assert_eq!(out.reward, -113.0);
    }

    #[test]
    fn slow_cruise_ten_meters_from_goal_scores_minus_12_5() {
        let arena = empty_arena(40.0, 40.0, Vec2::new(10.0, 20.0), Vec2::new(21.0, 20.0));
        // One 1 m/s step ends at (11, 20): 10 m out, slow deficit 1.5.
        let out = step(
            &arena,
            &state_at(arena.start, 0.0),
            Action::SetVelocity(1.0),
            &RewardParams::default(),
        );
        assert_eq!(out.outcome, Outcome::InProgress);
        assert_eq!(out.reward, -12.5);
    }

    #[test]
    fn yaw_holds_position_and_pays_the_full_slow_deficit() {
        let arena = empty_arena(40.0, 40.0, Vec2::new(10.0, 20.0), Vec2::new(30.0, 20.0));
        let s = state_at(arena.start, 0.0);
        let out = step(&arena, &s, Action::YawDegrees(108.0), &RewardParams::default());
        assert_eq!(out.state.position, s.position);
        assert_eq!(out.state.speed_m_s, 0.0);
        assert!((out.state.heading_rad - (-108f64.to_radians())).abs() < 1e-12);
        // -D_g(20) - 2.5 slow deficit - 1 step cost.
        assert_eq!(out.reward, -23.5);
        assert_eq!(out.outcome, Outcome::InProgress);
    }

    #[test]
    fn collision_takes_precedence_over_a_goal_crossing() {
        let mut arena = empty_arena(40.0, 40.0, Vec2::new(10.0, 20.0), Vec2::new(12.0, 20.0));
        // Goal disc is crossed first, wall contact follows within the sweep.
        arena.obstacles.push(Rect::new(Vec2::new(13.0, 15.0), Vec2::new(16.0, 25.0)));
        let out = step(
            &arena,
            &state_at(arena.start, 0.0),
            Action::SetVelocity(5.0),
            &RewardParams::default(),
        );
        assert_eq!(out.outcome, Outcome::Collision);
    }

    #[test]
    fn leaving_the_arena_is_a_collision_at_the_wall() {
        let arena = empty_arena(20.0, 20.0, Vec2::new(18.0, 10.0), Vec2::new(2.0, 10.0));
        let out = step(
            &arena,
            &state_at(arena.start, 0.0),
            Action::SetVelocity(5.0),
            &RewardParams::default(),
        );
        assert_eq!(out.outcome, Outcome::Collision);
        assert_eq!(out.state.position, Vec2::new(20.0, 10.0));
    }

    #[test]
    fn goal_beats_the_step_cap_on_the_final_step() {
        let arena = empty_arena(40.0, 40.0, Vec2::new(10.0, 20.0), Vec2::new(12.0, 20.0));
        let mut s = state_at(arena.start, 0.0);
        s.step_index = EPISODE_STEP_CAP - 1;
        let out = step(&arena, &s, Action::SetVelocity(2.0), &RewardParams::default());
        assert_eq!(out.outcome, Outcome::Goal);

        let far_goal = empty_arena(40.0, 40.0, Vec2::new(10.0, 20.0), Vec2::new(35.0, 20.0));
        let out = step(&far_goal, &s, Action::SetVelocity(2.0), &RewardParams::default());
        assert_eq!(out.outcome, Outcome::Timeout);
    }

    #[test]
    fn observation_shape_and_bounds_hold() {
        let mut arena = empty_arena(10.0, 10.0, Vec2::new(5.0, 5.0), Vec2::new(8.0, 8.0));
        arena.obstacles.push(Rect::new(Vec2::new(1.0, 1.0), Vec2::new(2.0, 2.0)));
        let mut s = state_at(arena.start, 0.7);
        s.speed_m_s = -5.0;
        s.step_index = 300;
        let obs = observe(&arena, &s);
        assert_eq!(obs.len(), OBS_LEN);
        for (i, v) in obs.iter().enumerate() {
            assert!((-1.0..=1.0).contains(v), "obs[{i}] = {v}");
        }
    }

    #[test]
    fn centered_agent_in_a_large_empty_arena_saturates_every_ray() {
        let arena = empty_arena(40.0, 40.0, Vec2::new(20.0, 20.0), Vec2::new(30.0, 20.0));
        let obs = observe(&arena, &state_at(arena.start, 0.3));
        for v in &obs[..RAY_COUNT] {
            assert_eq!(*v, 1.0);
        }
    }

    #[test]
    fn wall_ahead_reads_its_true_range() {
        // Facing +x from (30, 20) in a 40 x 40 box: the forward-most rays
        // almost align with the heading and read just over 10 m.
        let arena = empty_arena(40.0, 40.0, Vec2::new(30.0, 20.0), Vec2::new(5.0, 20.0));
        let obs = observe(&arena, &state_at(arena.start, 0.0));
        let mid = obs[RAY_COUNT / 2 - 1].min(obs[RAY_COUNT / 2]);
        assert!((mid - 0.5).abs() < 1e-3, "mid ray {mid}");
        // The extreme rays point straight left/right at walls 20 m away.
        assert_eq!(obs[0], 1.0);
        assert_eq!(obs[RAY_COUNT - 1], 1.0);
    }

    #[test]
    fn obstacle_dead_ahead_shortens_the_central_rays() {
        let mut arena = empty_arena(40.0, 40.0, Vec2::new(10.0, 20.0), Vec2::new(35.0, 20.0));
        arena.obstacles.push(Rect::new(Vec2::new(15.0, 18.0), Vec2::new(17.0, 22.0)));
        let obs = observe(&arena, &state_at(arena.start, 0.0));
        let mid = obs[RAY_COUNT / 2 - 1].min(obs[RAY_COUNT / 2]);
        assert!((mid - 0.25).abs() < 1e-3, "mid ray {mid}");
    }

    #[test]
    fn episode_enforces_bounds_and_termination() {
        let arena = empty_arena(40.0, 40.0, Vec2::new(10.0, 20.0), Vec2::new(15.0, 20.0));
        let mut ep = Episode::new(arena);
        assert!(matches!(ep.step(99), Err(Error::ActionIndex { .. })));
        let out = ep.step(9).unwrap();
        assert_eq!(out.outcome, Outcome::Goal);
        assert!(ep.done());
        assert_eq!(ep.cumulative_reward(), 999.0);
        assert!(matches!(ep.step(0), Err(Error::EpisodeOver)));
    }

    #[test]
    fn episode_times_out_at_the_step_cap() {
        let arena = empty_arena(400.0, 400.0, Vec2::new(200.0, 200.0), Vec2::new(390.0, 200.0));
        let mut ep = Episode::new(arena);
        let mut steps = 0;
        // Yaws hold position, so the episode can only run out the clock.
        loop {
            let out = ep.step(19).unwrap();
            steps += 1;
            if out.outcome.is_terminal() {
                assert_eq!(out.outcome, Outcome::Timeout);
                break;
            }
        }
        assert_eq!(steps, EPISODE_STEP_CAP);
    }
}
