use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::hyper::PpoHyper;
use super::rollout::RolloutBatch;
use crate::error::{Error, Result};
use crate::nn::{adam_step, backward, AdamConfig, AdamState, Minibatch, PolicyParams};

/// Losses averaged over every minibatch step of an update.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub steps: usize,
}

/// Stack the batch observations into a `steps x features` matrix.
pub fn observation_matrix(batch: &RolloutBatch) -> Array2<f64> {
    let n = batch.transitions.len();
    let d = batch.transitions.first().map_or(0, |t| t.obs.len());
    let mut m = Array2::zeros((n, d));
    for (mut row, t) in m.rows_mut().into_iter().zip(&batch.transitions) {
        row.assign(&ndarray::ArrayView1::from(t.obs.as_slice()));
    }
    m
}

/// Gather the given transitions into a minibatch.
pub fn gather(batch: &RolloutBatch, obs: &Array2<f64>, idx: &[usize]) -> Minibatch {
    Minibatch {
        obs: obs.select(Axis(0), idx),
        actions: idx.iter().map(|&i| batch.transitions[i].action).collect(),
        old_log_probs: idx.iter().map(|&i| batch.transitions[i].log_prob_old).collect(),
        advantages: idx.iter().map(|&i| batch.advantages[i]).collect(),
        returns: idx.iter().map(|&i| batch.returns[i]).collect(),
    }
}

/// `epochs` passes of shuffled minibatch Adam steps on the PPO loss.
///
/// The shuffle is driven by `seed` alone, so the update is a deterministic
/// function of its inputs. The last minibatch of an epoch may be short.
pub fn ppo_update(
    params: &mut PolicyParams,
    adam: &mut AdamState,
    batch: &RolloutBatch,
    hyper: &PpoHyper,
    seed: u64,
) -> Result<UpdateStats> {
    if batch.advantages.len() != batch.len() || batch.returns.len() != batch.len() {
        return Err(Error::Contract(
            "ppo_update needs advantages and returns; run compute_gae first".into(),
        ));
    }
    if batch.is_empty() {
        return Ok(UpdateStats::default());
    }
    let obs = observation_matrix(batch);
    let spec = hyper.loss_spec();
    let opt = AdamConfig::new(hyper.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..batch.len()).collect();
    let mut stats = UpdateStats::default();
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for (k, idx) in order.chunks(hyper.minibatch_size).enumerate() {
            let mb = gather(batch, &obs, idx);
            let (grads, loss) = backward(params, &mb, &spec).map_err(|e| match e {
                Error::Numerical(m) => Error::Numerical(format!("epoch {epoch}, minibatch {k}: {m}")),
                other => other,
            })?;
            adam_step(params, &grads, adam, &opt);
            stats.policy_loss += loss.policy_loss;
            stats.value_loss += loss.value_loss;
            stats.entropy += loss.entropy;
            stats.clip_fraction += loss.clip_fraction;
            stats.steps += 1;
        }
    }
    if !params.all_finite() {
        return Err(Error::Numerical(
            "parameters became non-finite during the update".into(),
        ));
    }
    let n = stats.steps as f64;
    stats.policy_loss /= n;
    stats.value_loss /= n;
    stats.entropy /= n;
    stats.clip_fraction /= n;
    Ok(stats)
}
