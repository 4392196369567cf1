use thiserror::Error;

/// Failures surfaced by arena generation, episode stepping, and training.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid arena spec: {0}")]
    InvalidSpec(String),

    #[error("no free placement found after {0} attempts")]
    Placement(u32),

    #[error("action index {index} out of range for table of {len}")]
    ActionIndex { index: usize, len: usize },

    #[error("episode already terminated")]
    EpisodeOver,

    #[error("training loss became non-finite at step {step}")]
    Diverged { step: u64 },

    #[error(transparent)]
    Net(#[from] quantnet::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
