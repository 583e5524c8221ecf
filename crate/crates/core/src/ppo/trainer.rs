use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::gae::compute_gae;
use super::hyper::PpoHyper;
use super::rollout::{collect_rollouts, CollectSpec, RolloutBatch};
use super::update::{ppo_update, UpdateStats};
use crate::env::{EnvConfig, Event, Mode};
use crate::error::Result;
use crate::nn::{AdamState, PolicyParams};
use crate::seed::derive_seed;

/// Consecutive iterations that must clear [`EARLY_STOP_GOAL_RATE`].
pub const EARLY_STOP_WINDOW: usize = 5;
/// Goal rate an iteration must strictly exceed to count toward stopping.
pub const EARLY_STOP_GOAL_RATE: f64 = 0.8;

/// True iff the last five goal rates all strictly exceed 0.8.
pub fn early_stop(goal_rate_history: &[f64]) -> bool {
    goal_rate_history.len() >= EARLY_STOP_WINDOW
        && goal_rate_history[goal_rate_history.len() - EARLY_STOP_WINDOW..]
            .iter()
            .all(|&g| g > EARLY_STOP_GOAL_RATE)
}

/// One row of `metrics.csv`. Field order is the column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iteration: u64,
    pub total_steps: usize,
    pub episodes: usize,
    pub mean_reward: f64,
    pub goal_rate: f64,
    pub collision_rate: f64,
    pub timeout_rate: f64,
    pub mean_ep_len: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub wall_clock_s: f64,
}

impl IterationMetrics {
    pub const CSV_HEADER: [&'static str; 12] = [
        "iteration",
        "total_steps",
        "episodes",
        "mean_reward",
        "goal_rate",
        "collision_rate",
        "timeout_rate",
        "mean_ep_len",
        "policy_loss",
        "value_loss",
        "entropy",
        "wall_clock_s",
    ];

    /// Episode statistics of `batch`; loss columns from `update`.
    pub fn from_batch(iteration: u64, batch: &RolloutBatch, update: &UpdateStats, wall_clock_s: f64) -> Self {
        let episodes = batch.episodes.len();
        let count = |e: Event| batch.episodes.iter().filter(|ep| ep.event == e).count();
        let (goals, hits) = (count(Event::GoalReached), count(Event::Collision));
        let n = episodes.max(1) as f64;
        let goal_rate = goals as f64 / n;
        let collision_rate = hits as f64 / n;
        IterationMetrics {
            iteration,
            total_steps: batch.len(),
            episodes,
            mean_reward: batch.episodes.iter().map(|e| e.total_reward).sum::<f64>() / n,
            goal_rate,
            collision_rate,
            // Everything that is neither goal nor collision timed out.
            timeout_rate: (episodes - goals - hits) as f64 / n,
            mean_ep_len: batch.len() as f64 / n,
            policy_loss: update.policy_loss,
            value_loss: update.value_loss,
            entropy: update.entropy,
            wall_clock_s,
        }
    }
}

/// Mutable training state: parameters, optimizer and progress.
pub struct Trainer {
    pub env_cfg: Arc<EnvConfig>,
    pub hyper: PpoHyper,
    pub params: PolicyParams,
    pub adam: AdamState,
    pub seed: u64,
    pub workers: usize,
    /// Completed iterations.
    pub iteration: u64,
    pub goal_rates: Vec<f64>,
    /// When false the `wall_clock_s` column is written as 0 so that metrics
    /// files are byte-reproducible.
    pub record_wall_clock: bool,
}

impl Trainer {
    pub fn new(env_cfg: Arc<EnvConfig>, hyper: PpoHyper, params: PolicyParams, seed: u64, workers: usize) -> Self {
        let adam = AdamState::new(&params);
        Trainer {
            env_cfg,
            hyper,
            params,
            adam,
            seed,
            workers: workers.max(1),
            iteration: 0,
            goal_rates: Vec::new(),
            record_wall_clock: true,
        }
    }

    /// Collect a batch, estimate advantages, update, and report.
    pub fn train_iteration(&mut self) -> Result<IterationMetrics> {
        let started = Instant::now();
        let it = self.iteration + 1;
        let mut batch = collect_rollouts(
            &self.params,
            &self.env_cfg,
            CollectSpec {
                mode: Mode::Train,
                min_steps: self.hyper.batch_min_steps,
                workers: self.workers,
                seed: derive_seed(self.seed, &[it, 0]),
            },
        )?;
        compute_gae(&mut batch, self.hyper.gamma, self.hyper.lambda);
        let update = ppo_update(
            &mut self.params,
            &mut self.adam,
            &batch,
            &self.hyper,
            derive_seed(self.seed, &[it, 1]),
        )?;
        let elapsed = if self.record_wall_clock {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let metrics = IterationMetrics::from_batch(it, &batch, &update, elapsed);
        self.iteration = it;
        self.goal_rates.push(metrics.goal_rate);
        Ok(metrics)
    }

    pub fn should_stop(&self) -> bool {
        early_stop(&self.goal_rates)
    }
}
