use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::metrics::MetricsWriter;
use crate::error::{Error, Result};
use crate::nn::{Checkpoint, PolicyParams};
use crate::ppo::{IterationMetrics, Trainer};
use crate::seed::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EarlyStop,
    MaxIterations,
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub seed: u64,
    pub iterations: u64,
    pub stop_reason: StopReason,
    pub final_goal_rate: Option<f64>,
    pub final_checkpoint: PathBuf,
}

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const FINAL_CHECKPOINT: &str = "final.ppo";

pub fn checkpoint_name(iteration: u64) -> String {
    format!("checkpoint_{iteration:04}.ppo")
}

/// Train until the goal-rate rule fires or `max_iterations` is reached.
pub fn run_train(cfg: &RunConfig, out_dir: &Path) -> Result<TrainSummary> {
    run_train_with(cfg, out_dir, |_| {})
}

/// [`run_train`] with a callback after every iteration (progress output).
pub fn run_train_with(
    cfg: &RunConfig,
    out_dir: &Path,
    mut on_iteration: impl FnMut(&IterationMetrics),
) -> Result<TrainSummary> {
    // Nothing touches the output directory before the config is known good.
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut metrics = MetricsWriter::create(out_dir.join(METRICS_FILE))?;

    let params = PolicyParams::init(cfg.architecture(), derive_seed(cfg.seed, &[u64::MAX]));
    let mut trainer = Trainer::new(cfg.env.clone(), cfg.ppo, params, cfg.seed, cfg.workers);
    trainer.record_wall_clock = cfg.output.wall_clock;

    let mut stop_reason = StopReason::MaxIterations;
    while trainer.iteration < cfg.max_iterations {
        let row = trainer.train_iteration().map_err(|e| match e {
            Error::Numerical(m) => Error::Numerical(format!("iteration {}: {m}", trainer.iteration + 1)),
            other => other,
        })?;
        metrics.append(&row)?;
        on_iteration(&row);
        if trainer.iteration.is_multiple_of(cfg.checkpoint_every) {
            checkpoint(&trainer, cfg).save(out_dir.join(checkpoint_name(trainer.iteration)))?;
        }
        if trainer.should_stop() {
            stop_reason = StopReason::EarlyStop;
            break;
        }
    }

    let final_path = out_dir.join(FINAL_CHECKPOINT);
    checkpoint(&trainer, cfg).save(&final_path)?;
    let summary = TrainSummary {
        seed: cfg.seed,
        iterations: trainer.iteration,
        stop_reason,
        final_goal_rate: trainer.goal_rates.last().copied(),
        final_checkpoint: final_path,
    };
    let path = out_dir.join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&summary)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}

fn checkpoint(trainer: &Trainer, cfg: &RunConfig) -> Checkpoint {
    Checkpoint {
        params: trainer.params.clone(),
        adam: trainer.adam.clone(),
        seed: cfg.seed,
        iteration: trainer.iteration,
        config: cfg.source.clone(),
    }
}
