//! The scalar PPO loss and its exact gradient.
//!
//! ```text
//! L = -mean(min(rho*A, clip(rho, 1-eps, 1+eps)*A))
//!     + c_v * mean(0.5 * (V - R)^2)
//!     - c_e * mean(H)
//! ```
//!
//! with `rho = exp(log pi(a|s) - log pi_old(a|s))`. The min selects the
//! unclipped branch on ties; the gradient flows only through the selected
//! branch.

use ndarray::Array2;

use super::policy::{Categorical, PolicyParams};
use crate::error::{Error, Result};
use crate::ppo::clipped_surrogate;
use crate::vehicle::ActionIndex;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossSpec {
    pub clip: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
}

/// Training samples for one gradient step.
#[derive(Clone, Debug, PartialEq)]
pub struct Minibatch {
    /// `batch x input`
    pub obs: Array2<f64>,
    pub actions: Vec<ActionIndex>,
    pub old_log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Minibatch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    fn check(&self) -> Result<()> {
        let n = self.actions.len();
        if n == 0
            || self.obs.nrows() != n
            || self.old_log_probs.len() != n
            || self.advantages.len() != n
            || self.returns.len() != n
        {
            return Err(Error::Contract(format!(
                "minibatch columns disagree: obs {}, actions {n}, old_log_probs {}, advantages {}, returns {}",
                self.obs.nrows(),
                self.old_log_probs.len(),
                self.advantages.len(),
                self.returns.len()
            )));
        }
        Ok(())
    }
}

/// Loss decomposition for one minibatch.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossStats {
    pub total: f64,
    /// `-mean(surrogate)`
    pub policy_loss: f64,
    /// `mean(0.5 * (V - R)^2)`
    pub value_loss: f64,
    pub entropy: f64,
    /// Fraction of samples whose gradient was cut by the clip.
    pub clip_fraction: f64,
}

fn check_finite(what: &str, values: &Array2<f64>) -> Result<()> {
    if let Some((idx, v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "{what} is {v} at sample {} output {}",
            idx.0, idx.1
        )));
    }
    Ok(())
}

/// Forward pass only.
pub fn ppo_loss(params: &PolicyParams, mb: &Minibatch, spec: &LossSpec) -> Result<LossStats> {
    Ok(evaluate(params, mb, spec, false)?.0)
}

/// Loss and `dL/dtheta` for every parameter.
pub fn backward(params: &PolicyParams, mb: &Minibatch, spec: &LossSpec) -> Result<(PolicyParams, LossStats)> {
    let (stats, grads) = evaluate(params, mb, spec, true)?;
    Ok((grads.expect("requested"), stats))
}

fn evaluate(
    params: &PolicyParams,
    mb: &Minibatch,
    spec: &LossSpec,
    want_grad: bool,
) -> Result<(LossStats, Option<PolicyParams>)> {
    mb.check()?;
    if mb.obs.ncols() != params.arch.input {
        return Err(Error::Contract(format!(
            "minibatch has {} features, network expects {}",
            mb.obs.ncols(),
            params.arch.input
        )));
    }
    let n = mb.len();
    let inv_n = 1.0 / n as f64;

    let p_trace = params.policy.forward_trace(mb.obs.view());
    let v_trace = params.value.forward_trace(mb.obs.view());
    check_finite("policy logit", &p_trace.output)?;
    check_finite("value", &v_trace.output)?;

    let mut d_logits = Array2::<f64>::zeros(p_trace.output.raw_dim());
    let mut d_values = Array2::<f64>::zeros(v_trace.output.raw_dim());
    let mut stats = LossStats::default();
    let mut clipped = 0usize;

    for i in 0..n {
        let dist = Categorical::from_logits(p_trace.output.row(i).as_slice().expect("standard layout"));
        let a = mb.actions[i].get();
        let adv = mb.advantages[i];
        let ratio = (dist.log_probs[a] - mb.old_log_probs[i]).exp();
        if !ratio.is_finite() {
            return Err(Error::Numerical(format!(
                "probability ratio overflowed at sample {i} (log pi = {}, old = {})",
                dist.log_probs[a], mb.old_log_probs[i]
            )));
        }
        let surrogate = clipped_surrogate(ratio, adv, spec.clip);
        let unclipped_active = ratio * adv <= ratio.clamp(1.0 - spec.clip, 1.0 + spec.clip) * adv;
        if !unclipped_active {
            clipped += 1;
        }
        let v = v_trace.output[[i, 0]];
        let err = v - mb.returns[i];
        stats.policy_loss -= surrogate;
        stats.value_loss += 0.5 * err * err;
        stats.entropy += dist.entropy;

        if want_grad {
            let d_surr_d_ratio = if unclipped_active { adv } else { 0.0 };
            let mut row = d_logits.row_mut(i);
            for j in 0..dist.probs.len() {
                let p = dist.probs[j];
                let onehot = if j == a { 1.0 } else { 0.0 };
                // -dS/dz_j = -A * ratio * (1[j=a] - p_j)
                let pg = -d_surr_d_ratio * ratio * (onehot - p);
                // dH/dz_j = -p_j (log p_j + H)
                let dh = -p * (dist.log_probs[j] + dist.entropy);
                row[j] = inv_n * (pg - spec.entropy_coef * dh);
            }
            d_values[[i, 0]] = inv_n * spec.value_coef * err;
        }
    }

    stats.policy_loss *= inv_n;
    stats.value_loss *= inv_n;
    stats.entropy *= inv_n;
    stats.clip_fraction = clipped as f64 * inv_n;
    stats.total = stats.policy_loss + spec.value_coef * stats.value_loss - spec.entropy_coef * stats.entropy;
    if !stats.total.is_finite() {
        return Err(Error::Numerical(format!("non-finite loss: {stats:?}")));
    }

    let grads = want_grad.then(|| {
        let mut g = params.zeros_like();
        params.policy.backward(&p_trace, d_logits, &mut g.policy);
        params.value.backward(&v_trace, d_values, &mut g.value);
        g
    });
    if let Some(g) = &grads {
        if !g.all_finite() {
            return Err(Error::Numerical("non-finite gradient".into()));
        }
    }
    Ok((stats, grads))
}
