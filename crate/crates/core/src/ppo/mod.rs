//! Proximal policy optimization over complete-episode batches.
//!
//! One iteration collects at least `batch_min_steps` transitions without
//! splitting any episode, estimates advantages with GAE, and then runs
//! several epochs of minibatch Adam on the clipped surrogate loss.

mod gae;
mod hyper;
mod rollout;
mod trainer;
mod update;

pub use gae::{compute_gae, gae_episode, normalize};
pub use hyper::PpoHyper;
pub use rollout::{collect_rollouts, CollectSpec, DoneKind, EpisodeInfo, RolloutBatch, Transition};
pub use trainer::{early_stop, IterationMetrics, Trainer, EARLY_STOP_GOAL_RATE, EARLY_STOP_WINDOW};
pub use update::{gather, observation_matrix, ppo_update, UpdateStats};

/// `min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)`, to be maximized.
pub fn clipped_surrogate(ratio: f64, advantage: f64, eps: f64) -> f64 {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * advantage;
    unclipped.min(clipped)
}
