use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Env, EnvConfig, Event, GoalPoint, Mode, Observation};
use crate::error::{Error, Result};
use crate::nn::{forward_policy, sample_categorical, Categorical, FlatObservation, PolicyParams};
use crate::seed::derive_seed;
use crate::vehicle::{encode_command, ActionIndex, Command, VehicleState, FORWARD_VELOCITIES, YAW_RATES};

/// Anything that picks an action from an observation.
pub trait Controller {
    fn act(&mut self, obs: &Observation) -> Result<ActionIndex>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    /// Most probable action.
    #[default]
    Greedy,
    /// Sample from the policy, as during training.
    Stochastic,
}

pub struct PolicyController {
    params: PolicyParams,
    arena_diagonal: f64,
    mode: PolicyMode,
    rng: ChaCha8Rng,
}

impl PolicyController {
    pub fn new(params: PolicyParams, env: &EnvConfig, mode: PolicyMode, seed: u64) -> Self {
        PolicyController {
            params,
            arena_diagonal: env.world.arena.diagonal(),
            mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Controller for PolicyController {
    fn act(&mut self, obs: &Observation) -> Result<ActionIndex> {
        let flat = FlatObservation::from_observation(obs, self.arena_diagonal);
        let dist = Categorical::from_logits(&forward_policy(&self.params, &flat)?);
        Ok(match self.mode {
            PolicyMode::Greedy => dist.argmax(),
            PolicyMode::Stochastic => sample_categorical(&dist.probs, &mut self.rng),
        })
    }
}

/// Hand-written baseline: turn toward the goal, fly at full speed once
/// roughly aligned. Ignores the depth image.
pub struct ScriptedController {
    dt: f64,
}

impl ScriptedController {
    pub fn new(env: &EnvConfig) -> Self {
        ScriptedController { dt: env.episode.dt }
    }
}

impl Controller for ScriptedController {
    fn act(&mut self, obs: &Observation) -> Result<ActionIndex> {
        let err = obs.heading_error;
        let yaw_rate = YAW_RATES
            .iter()
            .copied()
            .min_by(|a, b| {
                let ra = (err - a * self.dt).abs();
                let rb = (err - b * self.dt).abs();
                ra.total_cmp(&rb)
            })
            .expect("non-empty");
        let residual = (err - yaw_rate * self.dt).abs();
        let forward_velocity = if residual < 0.3 {
            FORWARD_VELOCITIES[FORWARD_VELOCITIES.len() - 1]
        } else {
            FORWARD_VELOCITIES[0]
        };
        encode_command(Command {
            forward_velocity,
            yaw_rate,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub episode: usize,
    pub start: VehicleState,
    pub goal: GoalPoint,
    pub outcome: Event,
    pub steps: usize,
    pub total_reward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: Mode,
    pub episodes: usize,
    pub goals: usize,
    pub goal_rate: f64,
    pub outcomes: Vec<EpisodeOutcome>,
}

/// One line of a replay file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TrajectoryRecord {
    /// Written first. `outcome` is how the episode ended.
    Episode {
        start: VehicleState,
        goal: GoalPoint,
        outcome: Event,
        steps: usize,
        total_reward: f64,
    },
    /// Pose after applying `action` at step `step`.
    Step {
        step: usize,
        x: f64,
        y: f64,
        yaw: f64,
        action: ActionIndex,
        reward: f64,
        event: Event,
    },
}

fn eval_env(env_cfg: &Arc<EnvConfig>, seed: u64) -> Env {
    Env::new(env_cfg.clone(), derive_seed(seed, &[0xE7A1]))
}

/// Seed for a controller's own randomness (stochastic policies) in an
/// evaluation with `seed`.
pub fn controller_seed(seed: u64) -> u64 {
    derive_seed(seed, &[0xAC7])
}

fn run_episode(
    env: &mut Env,
    controller: &mut dyn Controller,
    mode: Mode,
    mut on_step: impl FnMut(usize, &VehicleState, ActionIndex, f64, Event),
) -> Result<(Event, usize, f64)> {
    let mut obs = env.reset(mode)?;
    let mut total = 0.0;
    loop {
        let a = controller.act(&obs)?;
        let out = env.step(a)?;
        total += out.reward;
        on_step(env.step_count() - 1, env.state(), a, out.reward, out.event);
        if out.done {
            return Ok((out.event, env.step_count(), total));
        }
        obs = out.observation;
    }
}

/// Run `episodes` episodes and report the fraction that reached the goal.
/// Timeouts count as failures.
pub fn run_eval(
    env_cfg: &Arc<EnvConfig>,
    controller: &mut dyn Controller,
    mode: Mode,
    episodes: usize,
    seed: u64,
) -> Result<EvalReport> {
    if episodes == 0 {
        return Err(Error::Config("evaluation needs at least one episode".into()));
    }
    let mut env = eval_env(env_cfg, seed);
    let mut outcomes = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let (outcome, steps, total_reward) = run_episode(&mut env, controller, mode, |_, _, _, _, _| {})?;
        let ep = env.episode().expect("episode just ran");
        outcomes.push(EpisodeOutcome {
            episode,
            start: ep.start,
            goal: ep.goal,
            outcome,
            steps,
            total_reward,
        });
    }
    let goals = outcomes.iter().filter(|o| o.outcome == Event::GoalReached).count();
    Ok(EvalReport {
        mode,
        episodes,
        goals,
        goal_rate: goals as f64 / episodes as f64,
        outcomes,
    })
}

/// Record one episode step by step. Uses the same episode as the first
/// episode of [`run_eval`] with the same seed and mode.
pub fn replay(
    env_cfg: &Arc<EnvConfig>,
    controller: &mut dyn Controller,
    mode: Mode,
    seed: u64,
) -> Result<Vec<TrajectoryRecord>> {
    let mut env = eval_env(env_cfg, seed);
    let mut steps = Vec::new();
    let (outcome, n, total_reward) = run_episode(&mut env, controller, mode, |step, s, action, reward, event| {
        steps.push(TrajectoryRecord::Step {
            step,
            x: s.x,
            y: s.y,
            yaw: s.yaw,
            action,
            reward,
            event,
        })
    })?;
    let ep = env.episode().expect("episode just ran");
    let mut records = vec![TrajectoryRecord::Episode {
        start: ep.start,
        goal: ep.goal,
        outcome,
        steps: n,
        total_reward,
    }];
    records.extend(steps);
    Ok(records)
}

/// Write records as JSON lines.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
