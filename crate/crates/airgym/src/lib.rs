//! Randomized 2-D flight arena with range sensing, a discrete maneuver set,
//! and a deep Q-learning trainer for goal-seeking navigation policies.

mod actions;
mod arena;
mod env;
mod error;
mod eval;
mod geom;
mod mlp;
mod replay;
mod trainer;

pub use actions::{Action, ActionTable, T_MAX};
pub use arena::{generate_env, randomized_env, Arena, ArenaSpec, GoalRule};
pub use env::{
    observe, step, AgentState, Episode, Outcome, RewardParams, StepOutput, EPISODE_STEP_CAP,
    OBS_LEN, RAY_COUNT, SENSE_RANGE_M, V_CMD_MAX_M_S, V_REF_M_S,
};
pub use error::Error;
pub use eval::{
    evaluate, evaluate_on, EvalSummary, GreedyPolicy, Policy, RandomPolicy, ScriptedSeeker,
};
pub use geom::{
    point_segment_dist, ray_rect_entry, ray_rect_exit, segment_rect_entry, segment_rect_exit,
    Rect, Vec2,
};
pub use mlp::Mlp;
pub use replay::{ReplayBuffer, Transition};
pub use trainer::{dqn_train, EpisodeRecord, Hyper, TrainingLog};

pub type Result<T> = std::result::Result<T, Error>;
