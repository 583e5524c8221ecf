use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use crate::env::Observation;
use crate::error::{Error, Result};
use crate::vehicle::{ActionIndex, NUM_ACTIONS};

/// Network input: the normalized depth cells (row-major), then
/// `heading_error / pi` and `distance / arena_diagonal`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatObservation(pub Vec<f64>);

impl FlatObservation {
    pub fn from_observation(obs: &Observation, arena_diagonal: f64) -> Self {
        let mut v = Vec::with_capacity(obs.depth.data.len() + 2);
        v.extend_from_slice(&obs.depth.data);
        v.push(obs.heading_error / std::f64::consts::PI);
        v.push(obs.distance / arena_diagonal);
        FlatObservation(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Layer sizes shared by the policy and value trunks. Hidden layers use tanh.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Architecture {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub actions: usize,
}

impl Architecture {
    /// 110 inputs, two hidden layers of 256, 15 actions.
    pub fn standard(input: usize) -> Self {
        Architecture {
            input,
            hidden: vec![256, 256],
            actions: NUM_ACTIONS,
        }
    }

    fn sizes(&self, head: usize) -> Vec<usize> {
        let mut s = vec![self.input];
        s.extend(&self.hidden);
        s.push(head);
        s
    }

    pub fn policy_sizes(&self) -> Vec<usize> {
        self.sizes(self.actions)
    }

    pub fn value_sizes(&self) -> Vec<usize> {
        self.sizes(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input == 0 || self.actions == 0 || self.hidden.contains(&0) {
            return Err(Error::Config(format!("degenerate architecture {self:?}")));
        }
        Ok(())
    }
}

/// Separate policy and value networks.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyParams {
    pub arch: Architecture,
    pub policy: Mlp,
    pub value: Mlp,
}

const HIDDEN_GAIN: f64 = std::f64::consts::SQRT_2;
const POLICY_HEAD_GAIN: f64 = 0.01;
const VALUE_HEAD_GAIN: f64 = 1.0;

impl PolicyParams {
    pub fn init(arch: Architecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = Mlp::init(&arch.policy_sizes(), HIDDEN_GAIN, POLICY_HEAD_GAIN, &mut rng);
        let value = Mlp::init(&arch.value_sizes(), HIDDEN_GAIN, VALUE_HEAD_GAIN, &mut rng);
        PolicyParams { arch, policy, value }
    }

    pub fn zeros(arch: Architecture) -> Self {
        PolicyParams {
            policy: Mlp::zeros(&arch.policy_sizes()),
            value: Mlp::zeros(&arch.value_sizes()),
            arch,
        }
    }

    pub fn zeros_like(&self) -> Self {
        PolicyParams::zeros(self.arch.clone())
    }

    /// Tensor names in serialization order, paired with their shapes.
    pub fn tensor_layout(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        for (net, mlp) in [("policy", &self.policy), ("value", &self.value)] {
            for (l, layer) in mlp.layers.iter().enumerate() {
                out.push((format!("{net}.{l}.weight"), layer.weight.shape().to_vec()));
                out.push((format!("{net}.{l}.bias"), layer.bias.shape().to_vec()));
            }
        }
        out
    }

    pub fn tensors(&self) -> impl Iterator<Item = &[f64]> {
        self.policy.tensors().chain(self.value.tensors())
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.policy.tensors_mut().chain(self.value.tensors_mut())
    }

    pub fn num_params(&self) -> usize {
        self.tensors().map(<[f64]>::len).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().all(|t| t.iter().all(|v| v.is_finite()))
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.arch.input {
            return Err(Error::Contract(format!(
                "observation has {len} features, network expects {}",
                self.arch.input
            )));
        }
        Ok(())
    }

    /// Logits for a batch of observations (`batch x input`).
    pub fn policy_logits(&self, obs: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(obs.ncols())?;
        Ok(self.policy.forward(obs))
    }

    /// State values for a batch of observations.
    pub fn values(&self, obs: ArrayView2<f64>) -> Result<Vec<f64>> {
        self.check_input(obs.ncols())?;
        Ok(self.value.forward(obs).column(0).to_vec())
    }
}

fn single_row(obs: &FlatObservation) -> ArrayView2<'_, f64> {
    ArrayView1::from(obs.as_slice()).insert_axis(ndarray::Axis(0))
}

pub fn forward_policy(params: &PolicyParams, obs: &FlatObservation) -> Result<Vec<f64>> {
    Ok(params.policy_logits(single_row(obs))?.row(0).to_vec())
}

pub fn forward_value(params: &PolicyParams, obs: &FlatObservation) -> Result<f64> {
    Ok(params.values(single_row(obs))?[0])
}

/// Categorical distribution derived from a row of logits.
#[derive(Clone, Debug, PartialEq)]
pub struct Categorical {
    pub probs: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub entropy: f64,
}

impl Categorical {
    pub fn from_logits(logits: &[f64]) -> Self {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logits.iter().map(|z| (z - max).exp()).sum();
        let lse = max + sum.ln();
        let log_probs: Vec<f64> = logits.iter().map(|z| z - lse).collect();
        let probs: Vec<f64> = log_probs.iter().map(|lp| lp.exp()).collect();
        let entropy = -probs.iter().zip(&log_probs).map(|(p, lp)| p * lp).sum::<f64>();
        Categorical {
            probs,
            log_probs,
            entropy,
        }
    }

    pub fn argmax(&self) -> ActionIndex {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        ActionIndex::new(best).expect("distribution sized to the action grid")
    }
}

/// Probabilities, the log-probability of `a`, and the entropy.
pub fn softmax_logprob(logits: &[f64], a: ActionIndex) -> (Vec<f64>, f64, f64) {
    let d = Categorical::from_logits(logits);
    let lp = d.log_probs[a.get()];
    (d.probs, lp, d.entropy)
}

/// Inverse-CDF draw from normalized probabilities.
pub fn sample_categorical(probs: &[f64], rng: &mut impl Rng) -> ActionIndex {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last_nonzero = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_nonzero = i;
        }
        cum += p;
        if u < cum {
            return ActionIndex::new(i).expect("distribution sized to the action grid");
        }
    }
    // Rounding left the total a hair below u.
    ActionIndex::new(last_nonzero).expect("distribution sized to the action grid")
}
