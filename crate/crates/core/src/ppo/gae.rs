use super::rollout::RolloutBatch;

/// Generalized advantage estimates for one episode.
///
/// `bootstrap` is the value of the state after the last step (zero for
/// terminal episodes). Computed backwards:
/// `A_t = delta_t + gamma * lambda * A_{t+1}`, with
/// `delta_t = r_t + gamma * V_{t+1} - V_t`.
pub fn gae_episode(rewards: &[f64], values: &[f64], bootstrap: f64, gamma: f64, lambda: f64) -> Vec<f64> {
    assert_eq!(rewards.len(), values.len());
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut next_value = bootstrap;
    let mut carry = 0.0;
    for t in (0..n).rev() {
        let delta = rewards[t] + gamma * next_value - values[t];
        carry = delta + gamma * lambda * carry;
        adv[t] = carry;
        next_value = values[t];
    }
    adv
}

/// Fill `raw_advantages`, `returns` (`A_t + V_t`, pre-normalization) and
/// the per-batch normalized `advantages`.
pub fn compute_gae(batch: &mut RolloutBatch, gamma: f64, lambda: f64) {
    let n = batch.transitions.len();
    let mut raw = Vec::with_capacity(n);
    for ep in &batch.episodes {
        let steps = &batch.transitions[ep.start..ep.start + ep.len];
        let rewards: Vec<f64> = steps.iter().map(|t| t.reward).collect();
        let values: Vec<f64> = steps.iter().map(|t| t.value_old).collect();
        raw.extend(gae_episode(&rewards, &values, ep.bootstrap_value, gamma, lambda));
    }
    debug_assert_eq!(raw.len(), n, "episodes must tile the batch");
    batch.returns = raw
        .iter()
        .zip(&batch.transitions)
        .map(|(a, t)| a + t.value_old)
        .collect();
    batch.advantages = normalize(&raw);
    batch.raw_advantages = raw;
}

/// Shift to zero mean and scale to unit (population) variance. A constant
/// input is only centred.
pub fn normalize(x: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std > 0.0 {
        x.iter().map(|v| (v - mean) / std).collect()
    } else {
        x.iter().map(|v| v - mean).collect()
    }
}
