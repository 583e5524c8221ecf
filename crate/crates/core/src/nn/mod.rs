//! Policy and value networks, their exact gradients, and Adam.
//!
//! Everything is `f64`. The two networks share an architecture but no
//! weights; both are plain tanh MLPs over the flattened observation.

mod adam;
mod checkpoint;
mod loss;
mod mlp;
mod policy;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, FORMAT_VERSION, MAGIC};
pub use loss::{backward, ppo_loss, LossSpec, LossStats, Minibatch};
pub use mlp::{Dense, Mlp, MlpTrace};
pub use policy::{
    forward_policy, forward_value, sample_categorical, softmax_logprob, Architecture, Categorical, FlatObservation,
    PolicyParams,
};
