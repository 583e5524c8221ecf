//! Run configuration, read from a TOML file.
//!
//! ```toml
//! seed = 1
//! max_iterations = 200
//!
//! [world]
//! goal_radius = 0.5
//! vehicle_radius = 0.3
//! arena = { min = [0.0, -20.0], max = [40.0, 20.0] }
//! train = { start_region = { min = [2.0, -8.0], max = [6.0, 8.0] }, goal_region = { min = [34.0, -8.0], max = [38.0, 8.0] } }
//! test = { start_region = { min = [4.0, -6.0], max = [8.0, 6.0] }, goal_region = { min = [32.0, -6.0], max = [36.0, 6.0] } }
//!
//! [[world.obstacle]]
//! kind = "cylinder"
//! center = [13.0, -5.2]
//! radius = 0.75
//! ```
//!
//! Every table rejects unknown keys, so a typo is an error that names the
//! key and its line rather than a silently ignored setting.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::env::{EnvConfig, EpisodeSettings, RewardConfig};
use crate::error::{Error, Result};
use crate::nn::Architecture;
use crate::ppo::PpoHyper;
use crate::vehicle::NUM_ACTIONS;
use crate::world::WorldConfig;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    seed: u64,
    #[serde(default = "defaults::max_iterations")]
    max_iterations: u64,
    #[serde(default = "defaults::eval_episodes")]
    eval_episodes: usize,
    #[serde(default = "defaults::checkpoint_every")]
    checkpoint_every: u64,
    #[serde(default = "defaults::workers")]
    workers: usize,
    world: WorldConfig,
    #[serde(default)]
    episode: EpisodeSettings,
    #[serde(default)]
    reward: RewardConfig,
    #[serde(default)]
    ppo: PpoHyper,
    #[serde(default)]
    network: NetworkConfig,
    #[serde(default)]
    output: OutputConfig,
}

mod defaults {
    pub fn max_iterations() -> u64 {
        200
    }
    pub fn eval_episodes() -> usize {
        100
    }
    pub fn checkpoint_every() -> u64 {
        5
    }
    pub fn workers() -> usize {
        1
    }
    pub fn hidden() -> Vec<usize> {
        vec![256, 256]
    }
    pub fn yes() -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    #[serde(default = "defaults::hidden")]
    pub hidden: Vec<usize>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            hidden: defaults::hidden(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Record real elapsed time per iteration. Disable for byte-identical
    /// metrics across runs.
    #[serde(default = "defaults::yes")]
    pub wall_clock: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { wall_clock: true }
    }
}

/// A validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub env: Arc<EnvConfig>,
    pub ppo: PpoHyper,
    pub network: NetworkConfig,
    pub seed: u64,
    pub max_iterations: u64,
    pub eval_episodes: usize,
    pub checkpoint_every: u64,
    pub workers: usize,
    pub output: OutputConfig,
    /// The text this configuration was parsed from.
    pub source: String,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg = RunConfig {
            env: Arc::new(EnvConfig {
                world: file.world,
                episode: file.episode,
                reward: file.reward,
            }),
            ppo: file.ppo,
            network: file.network,
            seed: file.seed,
            max_iterations: file.max_iterations,
            eval_episodes: file.eval_episodes,
            checkpoint_every: file.checkpoint_every,
            workers: file.workers,
            output: file.output,
            source: text.to_owned(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.ppo.validate()?;
        self.architecture().validate()?;
        if self.eval_episodes == 0 {
            return Err(Error::Config("eval_episodes must be positive".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::Config("checkpoint_every must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        Ok(())
    }

    /// Network shape implied by the camera resolution and `[network]`.
    pub fn architecture(&self) -> Architecture {
        let cam = &self.env.world.camera;
        Architecture {
            input: cam.rows * cam.cols + 2,
            hidden: self.network.hidden.clone(),
            actions: NUM_ACTIONS,
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::parse(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
