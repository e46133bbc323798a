//! Goal-reaching training on the snake surrogate.
//!
//! Goals come from a staged [`curriculum`], each control step is scored by
//! a potential-field [`reward`], and trials end as described in
//! [`episode`]. The learner is an option-critic variant of PPO whose
//! low-level actions are the tonic inputs of the oscillator network and
//! whose options are values of the frequency ratio `K_f`.

pub mod checkpoint;
pub mod curriculum;
pub mod domain;
pub mod env;
pub mod episode;
pub mod mlp;
pub mod policy;
pub mod reward;
pub mod rollout;
pub mod train;

pub use checkpoint::{PolicyCheckpoint, TrainingMeta};
pub use curriculum::{monotonicity_violations, Curriculum, CurriculumLevel, TABLE_II};
pub use domain::{randomize_domain, DomainRanges, Range, TABLE_III};
pub use env::{EnvConfig, SnakeEnv, Transition};
pub use episode::{episode_status, EpisodeClock, EpisodeConfig, EpisodeLog, Outcome, StepRecord};
pub use policy::{Decision, Policy, Variant};
pub use reward::{reward, RewardConfig};
pub use rollout::{rollout, steering_study, steering_summary, tonic_amplitude, GoalScript, RolloutConfig, SteeringConfig, SteeringPoint};
pub use train::{train, TrainConfig, TrainReport, Trainer, UnfreezeRule, UpdateMetrics};
