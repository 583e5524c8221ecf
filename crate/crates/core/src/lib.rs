//! Reinforcement-learning workbench for planar quadrotor navigation.
//!
//! A quadrotor at fixed altitude flies through an arena of static obstacles
//! toward a goal. It sees a 9 x 12 depth image, the bearing to the goal and
//! the distance to the goal, and picks one of 15 (speed, yaw-rate) commands.
//! A from-scratch PPO trainer learns the policy.
//!
//! * [`world`]: arena geometry, collisions, ray casting and the depth camera.
//! * [`vehicle`]: the action grid and exact unicycle kinematics.
//! * [`env`]: episodes, observations and the shaped reward.
//! * [`nn`]: tanh MLPs with analytic gradients, Adam, and checkpoints.
//! * [`ppo`]: rollouts, GAE, the clipped surrogate update and the stop rule.
//! * [`harness`]: configuration, training runs, evaluation and replay.
//!
//! ```
//! use std::sync::Arc;
//! use uavnav::env::{Env, EnvConfig, Mode};
//! use uavnav::vehicle::ActionIndex;
//! use uavnav::world::{Rect, Regions, Vec2, WorldConfig};
//!
//! let arena = Rect::new(Vec2::new(-5.0, -5.0), Vec2::new(5.0, 5.0));
//! let regions = Regions {
//!     start_region: Rect::new(Vec2::new(-4.0, -1.0), Vec2::new(-3.0, 1.0)),
//!     goal_region: Rect::new(Vec2::new(3.0, -1.0), Vec2::new(4.0, 1.0)),
//! };
//! let mut env = Env::new(Arc::new(EnvConfig::new(WorldConfig::open(arena, regions))), 7);
//! let obs = env.reset(Mode::Train)?;
//! assert_eq!(obs.depth.data.len(), 9 * 12);
//! let out = env.step(ActionIndex::new(7)?)?; // 1 m/s straight ahead
//! assert!(!out.done);
//! # Ok::<(), uavnav::Error>(())
//! ```

pub mod env;
mod error;
pub mod harness;
pub mod nn;
pub mod ppo;
pub mod seed;
pub mod vehicle;
pub mod world;

pub use error::{Error, Result};

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/world.md")]
    mod world {}
    #[doc = include_str!("../../../book/src/vehicle.md")]
    mod vehicle {}
    #[doc = include_str!("../../../book/src/reward.md")]
    mod reward {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/ppo.md")]
    mod ppo {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
