//! Static world geometry: the arena, its obstacles, collision queries and
//! the ray queries behind the virtual depth camera.
//!
//! Everything here is a pure function of immutable inputs. The geometry is
//! planar; the camera's elevation rows are derived from the planar ray by
//! a slant correction (see [`render_depth`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vehicle::VehicleState;

/// A point or direction in the horizontal plane, meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Rotate counterclockwise by `theta`.
    pub fn rotate(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2 { x, y }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

/// Axis-aligned rectangle, inclusive bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub const fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    pub fn diagonal(&self) -> f64 {
        self.max.distance(self.min)
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }

    /// Shrink by `margin` on every side. May produce an inverted rectangle.
    pub fn shrink(&self, margin: f64) -> Rect {
        Rect::new(
            self.min + Vec2::new(margin, margin),
            self.max - Vec2::new(margin, margin),
        )
    }

    fn is_well_formed(&self) -> bool {
        self.min.x <= self.max.x && self.min.y <= self.max.y
    }

    fn corners(&self) -> [Vec2; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }

    /// Euclidean distance from `p` to the (filled) rectangle.
    fn distance_to_point(&self, p: Vec2) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx.hypot(dy)
    }
}

/// A static obstacle footprint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObstacleSpec", into = "ObstacleSpec")]
pub enum Obstacle {
    Cylinder { center: Vec2, radius: f64 },
    Box { center: Vec2, half_extents: Vec2, yaw: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ObstacleKind {
    Cylinder,
    Box,
}

/// Flat on-disk form of [`Obstacle`]; keeps unknown-key errors pointing at
/// the offending line.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleSpec {
    kind: ObstacleKind,
    center: Vec2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    half_extents: Option<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    yaw: Option<f64>,
}

impl TryFrom<ObstacleSpec> for Obstacle {
    type Error = String;
    fn try_from(s: ObstacleSpec) -> std::result::Result<Self, String> {
        match (s.kind, s.radius, s.half_extents) {
            (ObstacleKind::Cylinder, Some(radius), None) if s.yaw.is_none() => Ok(Obstacle::Cylinder {
                center: s.center,
                radius,
            }),
            (ObstacleKind::Box, None, Some(half_extents)) => Ok(Obstacle::Box {
                center: s.center,
                half_extents,
                yaw: s.yaw.unwrap_or(0.0),
            }),
            (ObstacleKind::Cylinder, ..) => Err("a cylinder takes `center` and `radius` only".into()),
            (ObstacleKind::Box, ..) => Err("a box takes `center`, `half_extents` and optional `yaw`".into()),
        }
    }
}

impl From<Obstacle> for ObstacleSpec {
    fn from(o: Obstacle) -> Self {
        match o {
            Obstacle::Cylinder { center, radius } => ObstacleSpec {
                kind: ObstacleKind::Cylinder,
                center,
                radius: Some(radius),
                half_extents: None,
                yaw: None,
            },
            Obstacle::Box {
                center,
                half_extents,
                yaw,
            } => ObstacleSpec {
                kind: ObstacleKind::Box,
                center,
                radius: None,
                half_extents: Some(half_extents),
                yaw: Some(yaw),
            },
        }
    }
}

impl Obstacle {
    pub fn center(&self) -> Vec2 {
        match *self {
            Obstacle::Cylinder { center, .. } | Obstacle::Box { center, .. } => center,
        }
    }

    /// Signed distance from `p` to the footprint boundary (negative inside).
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match *self {
            Obstacle::Cylinder { center, radius } => p.distance(center) - radius,
            Obstacle::Box {
                center,
                half_extents,
                yaw,
            } => {
                let local = (p - center).rotate(-yaw);
                let qx = local.x.abs() - half_extents.x;
                let qy = local.y.abs() - half_extents.y;
                let outside = qx.max(0.0).hypot(qy.max(0.0));
                let inside = qx.max(qy).min(0.0);
                outside + inside
            }
        }
    }

    /// Distance along the ray to the first boundary hit. `Some(0.0)` when
    /// the origin is already inside.
    pub fn ray_hit(&self, origin: Vec2, dir: Vec2) -> Option<f64> {
        match *self {
            Obstacle::Cylinder { center, radius } => {
                let m = origin - center;
                let b = m.dot(dir);
                let c = m.dot(m) - radius * radius;
                if c <= 0.0 {
                    return Some(0.0);
                }
                let disc = b * b - c;
                if disc < 0.0 || b > 0.0 {
                    return None;
                }
                // Conjugate form avoids cancellation for near-tangent rays.
                let t = c / (-b + disc.sqrt());
                Some(t)
            }
            Obstacle::Box {
                center,
                half_extents,
                yaw,
            } => {
                let o = (origin - center).rotate(-yaw);
                let d = dir.rotate(-yaw);
                let mut t_near = f64::NEG_INFINITY;
                let mut t_far = f64::INFINITY;
                for (oi, di, hi) in [(o.x, d.x, half_extents.x), (o.y, d.y, half_extents.y)] {
                    if di.abs() < 1e-15 {
                        if oi.abs() > hi {
                            return None;
                        }
                        continue;
                    }
                    let t1 = (-hi - oi) / di;
                    let t2 = (hi - oi) / di;
                    let (lo, hi_t) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
                    t_near = t_near.max(lo);
                    t_far = t_far.min(hi_t);
                }
                if t_near > t_far || t_far < 0.0 {
                    None
                } else {
                    Some(t_near.max(0.0))
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Obstacle::Cylinder { radius, center } => {
                radius > 0.0 && radius.is_finite() && center.x.is_finite() && center.y.is_finite()
            }
            Obstacle::Box {
                half_extents,
                center,
                yaw,
            } => {
                half_extents.x > 0.0
                    && half_extents.y > 0.0
                    && half_extents.x.is_finite()
                    && half_extents.y.is_finite()
                    && center.x.is_finite()
                    && center.y.is_finite()
                    && yaw.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "obstacle {self:?} must have finite, strictly positive dimensions"
            )))
        }
    }

    fn box_corners(center: Vec2, half_extents: Vec2, yaw: f64) -> [Vec2; 4] {
        let (hx, hy) = (half_extents.x, half_extents.y);
        [
            Vec2::new(-hx, -hy),
            Vec2::new(hx, -hy),
            Vec2::new(hx, hy),
            Vec2::new(-hx, hy),
        ]
        .map(|c| center + c.rotate(yaw))
    }

    fn inside_rect(&self, r: &Rect) -> bool {
        match *self {
            Obstacle::Cylinder { center, radius } => {
                r.shrink(radius).is_well_formed() && r.shrink(radius).contains(center)
            }
            Obstacle::Box {
                center,
                half_extents,
                yaw,
            } => Self::box_corners(center, half_extents, yaw)
                .iter()
                .all(|&c| r.contains(c)),
        }
    }

    /// Distance between the footprint and a filled rectangle (0 if they overlap).
    fn distance_to_rect(&self, r: &Rect) -> f64 {
        match *self {
            Obstacle::Cylinder { center, radius } => (r.distance_to_point(center) - radius).max(0.0),
            Obstacle::Box {
                center,
                half_extents,
                yaw,
            } => convex_quad_distance(&Self::box_corners(center, half_extents, yaw), &r.corners()),
        }
    }
}

fn segment_point_distance(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let e = b - a;
    let t = ((p - a).dot(e) / e.dot(e)).clamp(0.0, 1.0);
    p.distance(a + e * t)
}

/// Distance between two convex quadrilaterals given as CCW corner lists.
fn convex_quad_distance(a: &[Vec2; 4], b: &[Vec2; 4]) -> f64 {
    // Separating-axis test over all edge normals.
    let separated = [a, b].iter().any(|poly| {
        (0..4).any(|i| {
            let e = poly[(i + 1) % 4] - poly[i];
            let axis = Vec2::new(-e.y, e.x);
            let proj = |q: &[Vec2; 4]| {
                q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    let s = v.dot(axis);
                    (lo.min(s), hi.max(s))
                })
            };
            let (a_lo, a_hi) = proj(a);
            let (b_lo, b_hi) = proj(b);
            a_hi < b_lo || b_hi < a_lo
        })
    });
    if !separated {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (p, q) in [(a, b), (b, a)] {
        for v in p.iter() {
            for i in 0..4 {
                best = best.min(segment_point_distance(q[i], q[(i + 1) % 4], *v));
            }
        }
    }
    best
}

/// Virtual depth camera geometry. Angles are at cell centers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub h_fov_deg: f64,
    pub v_fov_deg: f64,
    pub rows: usize,
    pub cols: usize,
    pub max_range: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            h_fov_deg: 90.0,
            v_fov_deg: 60.0,
            rows: 9,
            cols: 12,
            max_range: 10.0,
        }
    }
}

impl CameraConfig {
    /// Azimuth of column `c` relative to the vehicle heading. Column 0 is the
    /// leftmost (most counterclockwise).
    pub fn azimuth(&self, c: usize) -> f64 {
        let fov = self.h_fov_deg.to_radians();
        fov / 2.0 - (c as f64 + 0.5) * fov / self.cols as f64
    }

    /// Elevation of row `r`. Row 0 is the top row.
    pub fn elevation(&self, r: usize) -> f64 {
        let fov = self.v_fov_deg.to_radians();
        fov / 2.0 - (r as f64 + 0.5) * fov / self.rows as f64
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Config("camera.rows and camera.cols must be positive".into()));
        }
        if !(self.h_fov_deg > 0.0 && self.h_fov_deg < 360.0) {
            return Err(Error::Config("camera.h_fov_deg must lie in (0, 360)".into()));
        }
        if !(self.v_fov_deg > 0.0 && self.v_fov_deg < 180.0) {
            return Err(Error::Config("camera.v_fov_deg must lie in (0, 180)".into()));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(Error::Config("camera.max_range must be positive".into()));
        }
        Ok(())
    }
}

/// Start and goal sampling rectangles for one mode (training or testing).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regions {
    pub start_region: Rect,
    pub goal_region: Rect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConfig {
    pub arena: Rect,
    #[serde(default, rename = "obstacle")]
    pub obstacles: Vec<Obstacle>,
    pub train: Regions,
    pub test: Regions,
    pub goal_radius: f64,
    pub vehicle_radius: f64,
    /// Flight altitude. Informational: the simulation is planar.
    #[serde(default = "default_altitude")]
    pub altitude: f64,
    #[serde(default)]
    pub camera: CameraConfig,
}

fn default_altitude() -> f64 {
    2.0
}

impl WorldConfig {
    /// An obstacle-free world with the given arena and regions used for both
    /// modes. Mostly useful for tests.
    pub fn open(arena: Rect, regions: Regions) -> Self {
        WorldConfig {
            arena,
            obstacles: Vec::new(),
            train: regions,
            test: regions,
            goal_radius: 0.5,
            vehicle_radius: 0.3,
            altitude: default_altitude(),
            camera: CameraConfig::default(),
        }
    }

    pub fn regions(&self, mode: crate::env::Mode) -> &Regions {
        match mode {
            crate::env::Mode::Train => &self.train,
            crate::env::Mode::Test => &self.test,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.arena;
        if !(a.min.x < a.max.x && a.min.y < a.max.y) {
            return Err(Error::Config("arena.min must be < arena.max componentwise".into()));
        }
        if !(self.goal_radius > 0.0 && self.goal_radius.is_finite()) {
            return Err(Error::Config("goal_radius must be positive".into()));
        }
        if !(self.vehicle_radius > 0.0 && self.vehicle_radius.is_finite()) {
            return Err(Error::Config("vehicle_radius must be positive".into()));
        }
        self.camera.validate()?;
        for (i, o) in self.obstacles.iter().enumerate() {
            o.validate()?;
            if !o.inside_rect(a) {
                return Err(Error::Config(format!("obstacle[{i}] footprint leaves the arena")));
            }
        }
        // Regions must keep a vehicle-radius clearance from walls and obstacles,
        // otherwise an episode could start in collision.
        let usable = a.shrink(self.vehicle_radius);
        for (mode, regions) in [("train", &self.train), ("test", &self.test)] {
            for (name, r) in [
                ("start_region", &regions.start_region),
                ("goal_region", &regions.goal_region),
            ] {
                if !r.is_well_formed() {
                    return Err(Error::Config(format!("{mode}.{name}: min must be <= max")));
                }
                if !usable.contains_rect(r) {
                    return Err(Error::Config(format!(
                        "{mode}.{name} must lie inside the arena with vehicle_radius clearance"
                    )));
                }
                for (i, o) in self.obstacles.iter().enumerate() {
                    if o.distance_to_rect(r) <= self.vehicle_radius {
                        return Err(Error::Config(format!(
                            "{mode}.{name} intersects inflated obstacle[{i}]"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// True iff `p` lies within the obstacle footprint grown by `inflation`.
pub fn point_in_obstacle(p: Vec2, o: &Obstacle, inflation: f64) -> bool {
    debug_assert!(inflation >= 0.0);
    o.signed_distance(p) <= inflation
}

/// Distance from `p` to the nearest arena wall; negative outside the arena.
pub fn wall_clearance(p: Vec2, arena: &Rect) -> f64 {
    (p.x - arena.min.x)
        .min(arena.max.x - p.x)
        .min(p.y - arena.min.y)
        .min(arena.max.y - p.y)
}

/// True iff a vehicle centred at `p` touches an obstacle or an arena wall.
pub fn collision(p: Vec2, w: &WorldConfig) -> bool {
    wall_clearance(p, &w.arena) <= w.vehicle_radius
        || w.obstacles.iter().any(|o| point_in_obstacle(p, o, w.vehicle_radius))
}

fn ray_segment(origin: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let e = b - a;
    let denom = dir.cross(e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let ao = a - origin;
    let t = ao.cross(e) / denom;
    let u = ao.cross(dir) / denom;
    (t >= 0.0 && (0.0..=1.0).contains(&u)).then_some(t)
}

/// Distance along a unit ray to the first wall or obstacle surface, clipped
/// to `max_range`. Origins inside an obstacle or outside the arena return 0.
pub fn ray_distance(origin: Vec2, direction: Vec2, w: &WorldConfig, max_range: f64) -> f64 {
    debug_assert!((direction.norm() - 1.0).abs() < 1e-9);
    if !w.arena.contains(origin) {
        return 0.0;
    }
    let corners = w.arena.corners();
    let mut best = max_range;
    for i in 0..4 {
        if let Some(t) = ray_segment(origin, direction, corners[i], corners[(i + 1) % 4]) {
            best = best.min(t);
        }
    }
    for o in &w.obstacles {
        if let Some(t) = o.ray_hit(origin, direction) {
            best = best.min(t);
        }
    }
    best.clamp(0.0, max_range)
}

/// A `rows × cols` grid of depths in meters, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthImage {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DepthImage {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

/// Render the depth camera from `state`. Each column casts one planar ray;
/// each row reuses it with the `1 / cos(elevation)` slant correction.
pub fn render_depth(state: &VehicleState, w: &WorldConfig, cam: &CameraConfig) -> DepthImage {
    let origin = state.position();
    let planar: Vec<f64> = (0..cam.cols)
        .map(|c| {
            let dir = Vec2::from_angle(state.yaw + cam.azimuth(c));
            ray_distance(origin, dir, w, cam.max_range)
        })
        .collect();
    let mut data = Vec::with_capacity(cam.rows * cam.cols);
    for r in 0..cam.rows {
        let slant = cam.elevation(r).cos();
        data.extend(planar.iter().map(|d| (d / slant).min(cam.max_range)));
    }
    DepthImage {
        rows: cam.rows,
        cols: cam.cols,
        data,
    }
}
