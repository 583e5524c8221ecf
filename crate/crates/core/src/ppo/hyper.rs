use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::LossSpec;

/// PPO hyperparameters. Defaults follow the common trainer defaults, with
/// a 10,000-step batch of complete episodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoHyper {
    pub gamma: f64,
    pub lambda: f64,
    pub clip: f64,
    pub lr: f64,
    pub batch_min_steps: usize,
    pub minibatch_size: usize,
    pub epochs: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
}

impl Default for PpoHyper {
    fn default() -> Self {
        PpoHyper {
            gamma: 0.99,
            lambda: 1.0,
            clip: 0.3,
            lr: 5e-5,
            batch_min_steps: 10_000,
            minibatch_size: 128,
            epochs: 30,
            value_coef: 1.0,
            entropy_coef: 0.0,
        }
    }
}

impl PpoHyper {
    pub fn loss_spec(&self) -> LossSpec {
        LossSpec {
            clip: self.clip,
            value_coef: self.value_coef,
            entropy_coef: self.entropy_coef,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.gamma) || !unit(self.lambda) {
            return Err(Error::Config("ppo.gamma and ppo.lambda must lie in [0, 1]".into()));
        }
        if !(self.clip > 0.0 && self.clip.is_finite()) {
            return Err(Error::Config("ppo.clip must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config("ppo.lr must be positive".into()));
        }
        if self.batch_min_steps == 0 || self.minibatch_size == 0 || self.epochs == 0 {
            return Err(Error::Config(
                "ppo.batch_min_steps, ppo.minibatch_size and ppo.epochs must be positive".into(),
            ));
        }
        if !(self.value_coef >= 0.0 && self.entropy_coef >= 0.0) {
            return Err(Error::Config("loss coefficients must be non-negative".into()));
        }
        Ok(())
    }
}
