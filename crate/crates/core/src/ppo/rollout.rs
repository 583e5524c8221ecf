use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::env::{Env, EnvConfig, Event, Mode};
use crate::error::Result;
use crate::nn::{forward_policy, forward_value, sample_categorical, Categorical, FlatObservation, PolicyParams};
use crate::seed::derive_seed;
use crate::vehicle::ActionIndex;

/// How a transition ended its episode, if it did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DoneKind {
    None,
    /// Goal or collision: nothing follows, bootstrap with zero.
    Terminal,
    /// Time limit: the state still has value, bootstrap with `V(s_T)`.
    Truncated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub obs: FlatObservation,
    pub action: ActionIndex,
    pub reward: f64,
    pub log_prob_old: f64,
    pub value_old: f64,
    pub done_kind: DoneKind,
}

/// One complete episode inside a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeInfo {
    /// Index of the first transition in the batch.
    pub start: usize,
    pub len: usize,
    pub event: Event,
    pub total_reward: f64,
    /// `V(s_T)` for truncated episodes, 0 otherwise.
    pub bootstrap_value: f64,
}

/// Complete episodes in collection order. `advantages` and `returns` are
/// empty until [`compute_gae`](super::compute_gae) fills them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RolloutBatch {
    pub transitions: Vec<Transition>,
    pub episodes: Vec<EpisodeInfo>,
    /// Advantages before per-batch normalization.
    pub raw_advantages: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    fn append(&mut self, mut other: RolloutBatch) {
        let offset = self.transitions.len();
        for e in &mut other.episodes {
            e.start += offset;
        }
        self.transitions.append(&mut other.transitions);
        self.episodes.append(&mut other.episodes);
    }
}

/// Rollout settings for one collection round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollectSpec {
    pub mode: Mode,
    pub min_steps: usize,
    pub workers: usize,
    pub seed: u64,
}

/// Run episodes with the stochastic policy until at least `min_steps`
/// transitions are collected, never cutting an episode short.
///
/// With `workers > 1` each worker owns an environment and RNG derived from
/// `(seed, worker id)`, collects `ceil(min_steps / workers)` steps, and the
/// results are concatenated in worker order.
pub fn collect_rollouts(params: &PolicyParams, env_cfg: &Arc<EnvConfig>, spec: CollectSpec) -> Result<RolloutBatch> {
    let workers = spec.workers.max(1);
    let quota = spec.min_steps.div_ceil(workers);
    let parts: Vec<Result<RolloutBatch>> = (0..workers as u64)
        .into_par_iter()
        .map(|w| {
            let env = Env::new(env_cfg.clone(), derive_seed(spec.seed, &[w, 0]));
            let rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[w, 1]));
            collect_worker(params, env, rng, spec.mode, quota)
        })
        .collect();
    let mut batch = RolloutBatch::default();
    for part in parts {
        batch.append(part?);
    }
    Ok(batch)
}

fn collect_worker(
    params: &PolicyParams,
    mut env: Env,
    mut rng: ChaCha8Rng,
    mode: Mode,
    quota: usize,
) -> Result<RolloutBatch> {
    let diag = env.config().world.arena.diagonal();
    let mut batch = RolloutBatch::default();
    while batch.transitions.len() < quota {
        let start = batch.transitions.len();
        let mut obs = FlatObservation::from_observation(&env.reset(mode)?, diag);
        let mut total = 0.0;
        loop {
            let dist = Categorical::from_logits(&forward_policy(params, &obs)?);
            let value = forward_value(params, &obs)?;
            let action = sample_categorical(&dist.probs, &mut rng);
            let out = env.step(action)?;
            total += out.reward;
            let next = FlatObservation::from_observation(&out.observation, diag);
            let done_kind = match out.event {
                Event::None => DoneKind::None,
                Event::GoalReached | Event::Collision => DoneKind::Terminal,
                Event::Timeout => DoneKind::Truncated,
            };
            batch.transitions.push(Transition {
                obs: std::mem::replace(&mut obs, next),
                action,
                reward: out.reward,
                log_prob_old: dist.log_probs[action.get()],
                value_old: value,
                done_kind,
            });
            if out.done {
                let bootstrap_value = if done_kind == DoneKind::Truncated {
                    forward_value(params, &obs)?
                } else {
                    0.0
                };
                batch.episodes.push(EpisodeInfo {
                    start,
                    len: batch.transitions.len() - start,
                    event: out.event,
                    total_reward: total,
                    bootstrap_value,
                });
                break;
            }
        }
    }
    Ok(batch)
}
