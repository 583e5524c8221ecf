//! Discrete command decoding and planar kinematics of the quadrotor.
//!
//! The vehicle flies at a fixed altitude as a unicycle: a forward speed
//! along its heading and a yaw rate. Steps integrate the constant twist
//! exactly, so the pose after a step does not depend on any sub-stepping.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::Vec2;

/// Forward speed choices, m/s.
pub const FORWARD_VELOCITIES: [f64; 3] = [0.0, 1.0, 2.0];
/// Yaw-rate choices, rad/s.
pub const YAW_RATES: [f64; 5] = [-FRAC_PI_2, -FRAC_PI_4, 0.0, FRAC_PI_4, FRAC_PI_2];
/// Size of the flattened action grid.
pub const NUM_ACTIONS: usize = FORWARD_VELOCITIES.len() * YAW_RATES.len();

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Heading in `(-pi, pi]`, counterclockwise from +x.
    pub yaw: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        VehicleState {
            x,
            y,
            yaw: wrap_angle(yaw),
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Command {
    pub forward_velocity: f64,
    pub yaw_rate: f64,
}

/// Index into the 3 x 5 grid of commands, speed-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionIndex(u8);

impl ActionIndex {
    pub fn new(index: usize) -> Result<Self> {
        if index < NUM_ACTIONS {
            Ok(ActionIndex(index as u8))
        } else {
            Err(Error::Contract(format!(
                "action index {index} outside [0, {}]",
                NUM_ACTIONS - 1
            )))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = ActionIndex> {
        (0..NUM_ACTIONS as u8).map(ActionIndex)
    }
}

impl TryFrom<usize> for ActionIndex {
    type Error = Error;
    fn try_from(i: usize) -> Result<Self> {
        ActionIndex::new(i)
    }
}

pub fn decode_action(a: ActionIndex) -> Command {
    let i = a.get();
    Command {
        forward_velocity: FORWARD_VELOCITIES[i / YAW_RATES.len()],
        yaw_rate: YAW_RATES[i % YAW_RATES.len()],
    }
}

/// Inverse of [`decode_action`]. Fails for commands outside the grid.
pub fn encode_command(c: Command) -> Result<ActionIndex> {
    let v = FORWARD_VELOCITIES.iter().position(|&v| v == c.forward_velocity);
    let w = YAW_RATES.iter().position(|&w| w == c.yaw_rate);
    match (v, w) {
        (Some(v), Some(w)) => ActionIndex::new(v * YAW_RATES.len() + w),
        _ => Err(Error::Contract(format!("command {c:?} is not on the action grid"))),
    }
}

/// Advance `s` by holding `c` for `dt` seconds along the exact arc.
pub fn integrate(s: &VehicleState, c: Command, dt: f64) -> VehicleState {
    debug_assert!(dt > 0.0);
    let v = c.forward_velocity;
    let w = c.yaw_rate;
    let turn = w * dt;
    // Chord of the arc, taken along the mean heading. For a straight line
    // the chord is the full path length.
    let chord = if w.abs() < 1e-9 {
        v * dt
    } else {
        2.0 * v / w * (turn / 2.0).sin()
    };
    let mid = s.yaw + turn / 2.0;
    VehicleState {
        x: s.x + chord * mid.cos(),
        y: s.y + chord * mid.sin(),
        yaw: wrap_angle(s.yaw + turn),
    }
}
