//! The episodic navigation task: start/goal sampling, observations,
//! the shaped reward, termination and the reset/step lifecycle.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vehicle::{decode_action, integrate, wrap_angle, ActionIndex, VehicleState};
use crate::world::{collision, render_depth, DepthImage, Rect, Vec2, WorldConfig};

/// Which pair of sampling rectangles an episode draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Train,
    Test,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalPoint {
    pub x: f64,
    pub y: f64,
}

impl GoalPoint {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// How a step ended, if it did.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    None,
    GoalReached,
    Collision,
    Timeout,
}

/// Coefficients of the per-step reward. Defaults are the reference ones;
/// changing them is only meant for ablations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    pub progress_scale: f64,
    pub goal_bonus: f64,
    pub collision_penalty: f64,
    pub step_penalty: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            progress_scale: 20.0,
            goal_bonus: 2000.0,
            collision_penalty: 1000.0,
            step_penalty: 1.0,
        }
    }
}

impl RewardConfig {
    /// `progress_scale * (d_prev - d_curr) + goal_bonus * [goal]
    ///  - collision_penalty * [collision] - step_penalty`.
    ///
    /// Progress is rewarded when the distance shrinks, so the sign of the
    /// shaping term is `d_prev - d_curr`.
    pub fn evaluate(&self, d_prev: f64, d_curr: f64, goal_reached: bool, collision: bool) -> f64 {
        let goal = if goal_reached { 1.0 } else { 0.0 };
        let hit = if collision { 1.0 } else { 0.0 };
        self.progress_scale * (d_prev - d_curr) + self.goal_bonus * goal
            - self.collision_penalty * hit
            - self.step_penalty
    }
}

/// The reward with the default coefficients.
pub fn reward(d_prev: f64, d_curr: f64, goal_reached: bool, collision: bool) -> f64 {
    RewardConfig::default().evaluate(d_prev, d_curr, goal_reached, collision)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeSettings {
    pub max_steps: usize,
    /// Control interval in seconds; commands are held over one interval.
    pub dt: f64,
}

impl Default for EpisodeSettings {
    fn default() -> Self {
        EpisodeSettings {
            max_steps: 400,
            dt: 0.2,
        }
    }
}

/// Everything an environment instance needs besides its RNG.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvConfig {
    pub world: WorldConfig,
    pub episode: EpisodeSettings,
    pub reward: RewardConfig,
}

impl EnvConfig {
    pub fn new(world: WorldConfig) -> Self {
        EnvConfig {
            world,
            episode: EpisodeSettings::default(),
            reward: RewardConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        if self.episode.max_steps == 0 {
            return Err(Error::Config("episode.max_steps must be positive".into()));
        }
        if !(self.episode.dt > 0.0 && self.episode.dt.is_finite()) {
            return Err(Error::Config("episode.dt must be positive".into()));
        }
        let r = &self.reward;
        if ![r.progress_scale, r.goal_bonus, r.collision_penalty, r.step_penalty]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::Config("reward coefficients must be finite".into()));
        }
        Ok(())
    }
}

/// What the agent perceives after every reset and step.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    /// Depths divided by the camera's max range, so every cell is in [0, 1].
    pub depth: DepthImage,
    /// Bearing to the goal relative to the heading, in (-pi, pi].
    pub heading_error: f64,
    /// Distance to the goal, meters.
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub event: Event,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub start: VehicleState,
    pub goal: GoalPoint,
    pub max_steps: usize,
    /// Seed the start/goal pair was drawn from.
    pub seed: u64,
}

fn uniform_in(r: &Rect, rng: &mut impl Rng) -> Vec2 {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    Vec2::new(r.min.x + u * (r.max.x - r.min.x), r.min.y + v * (r.max.y - r.min.y))
}

const MAX_SAMPLING_TRIES: usize = 1000;

/// Draw a start pose and a goal from the mode's rectangles.
///
/// Pairs closer than the goal radius are rejected. The one exception is a
/// goal radius spanning the whole arena, where every pair is accepted and
/// every episode ends on its first step.
pub fn sample_start_goal(world: &WorldConfig, mode: Mode, rng: &mut impl Rng) -> Result<(VehicleState, GoalPoint)> {
    let regions = world.regions(mode);
    let covers_arena = world.goal_radius >= world.arena.diagonal();
    for _ in 0..MAX_SAMPLING_TRIES {
        let start = uniform_in(&regions.start_region, rng);
        let goal = uniform_in(&regions.goal_region, rng);
        if covers_arena || start.distance(goal) > world.goal_radius {
            let u: f64 = rng.random();
            // u in [0, 1) maps to yaw in (-pi, pi].
            let yaw = PI - u * TAU;
            return Ok((
                VehicleState {
                    x: start.x,
                    y: start.y,
                    yaw,
                },
                GoalPoint { x: goal.x, y: goal.y },
            ));
        }
    }
    Err(Error::Config(format!(
        "no start/goal pair farther apart than goal_radius after {MAX_SAMPLING_TRIES} tries ({mode:?} regions)"
    )))
}

/// Bearing from the vehicle to the goal, relative to its heading.
/// Positive means the goal is to the left.
pub fn heading_error(s: &VehicleState, g: &GoalPoint) -> f64 {
    let dx = g.x - s.x;
    let dy = g.y - s.y;
    if dx == 0.0 && dy == 0.0 {
        return 0.0;
    }
    wrap_angle(dy.atan2(dx) - s.yaw)
}

pub fn observe(s: &VehicleState, g: &GoalPoint, w: &WorldConfig) -> Observation {
    let mut depth = render_depth(s, w, &w.camera);
    let scale = w.camera.max_range;
    for d in &mut depth.data {
        *d /= scale;
    }
    Observation {
        depth,
        heading_error: heading_error(s, g),
        distance: s.position().distance(g.position()),
    }
}

/// One environment instance: single owner, owns its RNG.
#[derive(Clone, Debug)]
pub struct Env {
    cfg: Arc<EnvConfig>,
    rng: ChaCha8Rng,
    episode: Option<EpisodeConfig>,
    state: VehicleState,
    step_count: usize,
    done: bool,
}

impl Env {
    pub fn new(cfg: Arc<EnvConfig>, seed: u64) -> Self {
        Env {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
            episode: None,
            state: VehicleState::new(0.0, 0.0, 0.0),
            step_count: 0,
            done: true,
        }
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn state(&self) -> &VehicleState {
        &self.state
    }

    pub fn episode(&self) -> Option<&EpisodeConfig> {
        self.episode.as_ref()
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Draw a fresh episode from the mode's rectangles.
    pub fn reset(&mut self, mode: Mode) -> Result<Observation> {
        let seed = self.rng.next_u64();
        let mut ep_rng = ChaCha8Rng::seed_from_u64(seed);
        let (start, goal) = sample_start_goal(&self.cfg.world, mode, &mut ep_rng)?;
        Ok(self.reset_to(EpisodeConfig {
            start,
            goal,
            max_steps: self.cfg.episode.max_steps,
            seed,
        }))
    }

    /// Start an explicitly specified episode.
    pub fn reset_to(&mut self, episode: EpisodeConfig) -> Observation {
        self.state = episode.start;
        self.episode = Some(episode);
        self.step_count = 0;
        self.done = false;
        self.observation()
    }

    pub fn observation(&self) -> Observation {
        let goal = self.episode.map(|e| e.goal).unwrap_or(GoalPoint { x: 0.0, y: 0.0 });
        observe(&self.state, &goal, &self.cfg.world)
    }

    pub fn step(&mut self, a: ActionIndex) -> Result<StepOutcome> {
        let episode = match self.episode {
            Some(e) if !self.done => e,
            _ => {
                return Err(Error::Contract(
                    "step called without an active episode; call reset first".into(),
                ))
            }
        };
        let goal = episode.goal.position();
        let world = &self.cfg.world;
        let d_prev = self.state.position().distance(goal);
        self.state = integrate(&self.state, decode_action(a), self.cfg.episode.dt);
        self.step_count += 1;
        let d_curr = self.state.position().distance(goal);

        let event = if d_curr < world.goal_radius {
            Event::GoalReached
        } else if collision(self.state.position(), world) {
            Event::Collision
        } else if self.step_count >= episode.max_steps {
            Event::Timeout
        } else {
            Event::None
        };
        let reward = self
            .cfg
            .reward
            .evaluate(d_prev, d_curr, event == Event::GoalReached, event == Event::Collision);
        self.done = event != Event::None;
        Ok(StepOutcome {
            observation: observe(&self.state, &episode.goal, world),
            reward,
            done: self.done,
            event,
        })
    }
}
