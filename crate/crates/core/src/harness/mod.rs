//! Experiment plumbing: configuration, training runs with metrics and
//! checkpoints, evaluation, and trajectory replay.

mod config;
mod eval;
mod metrics;
mod train;

pub use config::{load_config, NetworkConfig, OutputConfig, RunConfig};
pub use eval::{
    controller_seed, replay, run_eval, write_jsonl, Controller, EpisodeOutcome, EvalReport, PolicyController,
    PolicyMode, ScriptedController, TrajectoryRecord,
};
pub use metrics::{read_metrics, MetricsWriter};
pub use train::{
    checkpoint_name, run_train, run_train_with, StopReason, TrainSummary, FINAL_CHECKPOINT, METRICS_FILE, SUMMARY_FILE,
};

use crate::env::Mode;
use crate::error::Result;
use crate::nn::Checkpoint;

/// Load a checkpoint together with the configuration embedded in it.
pub fn load_run(checkpoint: impl AsRef<std::path::Path>) -> Result<(Checkpoint, RunConfig)> {
    let ck = Checkpoint::load(checkpoint)?;
    let cfg = RunConfig::parse(&ck.config)?;
    if cfg.architecture() != ck.params.arch {
        return Err(crate::error::Error::Checkpoint(format!(
            "architecture {:?} does not match embedded config {:?}",
            ck.params.arch,
            cfg.architecture()
        )));
    }
    Ok((ck, cfg))
}

/// Evaluate a saved policy on `episodes` episodes.
pub fn eval_checkpoint(
    checkpoint: impl AsRef<std::path::Path>,
    mode: Mode,
    episodes: usize,
    seed: u64,
    policy_mode: PolicyMode,
) -> Result<EvalReport> {
    if episodes == 0 {
        return Err(crate::error::Error::Config(
            "evaluation needs at least one episode".into(),
        ));
    }
    let (ck, cfg) = load_run(checkpoint)?;
    let mut ctl = PolicyController::new(ck.params, &cfg.env, policy_mode, controller_seed(seed));
    run_eval(&cfg.env, &mut ctl, mode, episodes, seed)
}
