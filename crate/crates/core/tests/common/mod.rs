//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the library's numerics; only its data types are
//! shared. Each oracle is the slow, obvious formulation of what the library
//! computes in a fast or clever way.

#![allow(dead_code)]

use rand::Rng;
use uavnav::nn::{Mlp, PolicyParams};
use uavnav::world::{Obstacle, Rect, Regions, Vec2, WorldConfig};

// ---------------------------------------------------------------- reward

/// The shaped reward written out term by term.
pub fn reward_oracle(d_prev: f64, d_curr: f64, goal: bool, collision: bool) -> f64 {
    let mut r = 20.0 * (d_prev - d_curr);
    if goal {
        r += 2000.0;
    }
    if collision {
        r -= 1000.0;
    }
    r - 1.0
}

// ---------------------------------------------------------------- GAE

/// `A_t = sum_l (gamma lambda)^l delta_{t+l}` as an explicit double sum.
pub fn gae_oracle(rewards: &[f64], values: &[f64], bootstrap: f64, gamma: f64, lambda: f64) -> Vec<f64> {
    let n = rewards.len();
    let v_next = |t: usize| if t + 1 < n { values[t + 1] } else { bootstrap };
    (0..n)
        .map(|t| {
            (t..n)
                .map(|k| {
                    let delta = rewards[k] + gamma * v_next(k) - values[k];
                    (gamma * lambda).powi((k - t) as i32) * delta
                })
                .sum()
        })
        .collect()
}

// ---------------------------------------------------------------- geometry

/// Inside test for a footprint, written from the shape definitions.
pub fn inside_obstacle(o: &Obstacle, p: Vec2) -> bool {
    match *o {
        Obstacle::Cylinder { center, radius } => {
            let dx = p.x - center.x;
            let dy = p.y - center.y;
            dx * dx + dy * dy <= radius * radius
        }
        Obstacle::Box {
            center,
            half_extents,
            yaw,
        } => {
            // Project onto the box axes.
            let (s, c) = yaw.sin_cos();
            let dx = p.x - center.x;
            let dy = p.y - center.y;
            let u = c * dx + s * dy;
            let v = -s * dx + c * dy;
            u.abs() <= half_extents.x && v.abs() <= half_extents.y
        }
    }
}

fn blocked(w: &WorldConfig, p: Vec2) -> bool {
    let a = &w.arena;
    p.x <= a.min.x
        || p.x >= a.max.x
        || p.y <= a.min.y
        || p.y >= a.max.y
        || w.obstacles.iter().any(|o| inside_obstacle(o, p))
}

/// March along the ray in 1 mm steps, then bisect the first blocked step.
pub fn ray_march_oracle(origin: Vec2, dir: Vec2, w: &WorldConfig, max_range: f64) -> f64 {
    const STEP: f64 = 1e-3;
    let at = |t: f64| Vec2::new(origin.x + t * dir.x, origin.y + t * dir.y);
    if blocked(w, origin) {
        return 0.0;
    }
    let mut prev = 0.0;
    let mut k = 1u64;
    loop {
        let t = (k as f64 * STEP).min(max_range + STEP);
        if blocked(w, at(t)) {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if blocked(w, at(mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return hi.min(max_range);
        }
        if t > max_range {
            return max_range;
        }
        prev = t;
        k += 1;
    }
}

pub fn random_obstacle(rng: &mut impl Rng, area: &Rect) -> Obstacle {
    let center = Vec2::new(
        rng.random_range(area.min.x..area.max.x),
        rng.random_range(area.min.y..area.max.y),
    );
    if rng.random_bool(0.5) {
        Obstacle::Cylinder {
            center,
            radius: rng.random_range(0.2..1.5),
        }
    } else {
        Obstacle::Box {
            center,
            half_extents: Vec2::new(rng.random_range(0.1..1.5), rng.random_range(0.1..1.5)),
            yaw: rng.random_range(-3.2..3.2),
        }
    }
}

/// A 20 m x 20 m world with a handful of random obstacles.
pub fn random_world(rng: &mut impl Rng, obstacles: usize) -> WorldConfig {
    let arena = Rect::new(Vec2::new(-10.0, -10.0), Vec2::new(10.0, 10.0));
    let regions = Regions {
        start_region: Rect::new(Vec2::new(-9.0, -1.0), Vec2::new(-8.0, 1.0)),
        goal_region: Rect::new(Vec2::new(8.0, -1.0), Vec2::new(9.0, 1.0)),
    };
    let mut w = WorldConfig::open(arena, regions);
    w.obstacles = (0..obstacles)
        .map(|_| random_obstacle(rng, &arena.shrink(1.0)))
        .collect();
    w
}

// ---------------------------------------------------------------- networks

/// Forward pass with explicit loops over the stored weights.
#[allow(clippy::needless_range_loop)]
pub fn mlp_oracle(net: &Mlp, x: &[f64]) -> Vec<f64> {
    let mut h = x.to_vec();
    let last = net.layers.len() - 1;
    for (l, layer) in net.layers.iter().enumerate() {
        let (rows, cols) = layer.weight.dim();
        assert_eq!(cols, h.len());
        let mut z = vec![0.0; rows];
        for i in 0..rows {
            let mut acc = layer.bias[i];
            for j in 0..cols {
                acc += layer.weight[[i, j]] * h[j];
            }
            z[i] = if l < last { acc.tanh() } else { acc };
        }
        h = z;
    }
    h
}

/// `log softmax(logits)` via log-sum-exp.
pub fn log_softmax_oracle(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

/// One training sample for [`ppo_loss_oracle`].
#[derive(Clone, Debug)]
pub struct Sample {
    pub obs: Vec<f64>,
    pub action: usize,
    pub old_log_prob: f64,
    pub advantage: f64,
    pub ret: f64,
}

/// The PPO loss evaluated sample by sample from the loop-based forward pass.
pub fn ppo_loss_oracle(
    params: &PolicyParams,
    samples: &[Sample],
    clip: f64,
    value_coef: f64,
    entropy_coef: f64,
) -> f64 {
    let n = samples.len() as f64;
    let mut total = 0.0;
    for s in samples {
        let logp = log_softmax_oracle(&mlp_oracle(&params.policy, &s.obs));
        let ratio = (logp[s.action] - s.old_log_prob).exp();
        let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
        let surrogate = (ratio * s.advantage).min(clipped * s.advantage);
        let v = mlp_oracle(&params.value, &s.obs)[0];
        let entropy: f64 = -logp.iter().map(|l| l.exp() * l).sum::<f64>();
        total += -surrogate + value_coef * 0.5 * (v - s.ret) * (v - s.ret) - entropy_coef * entropy;
    }
    total / n
}

/// Central-difference gradient of `f` over every parameter, in the order of
/// [`PolicyParams::tensors`].
pub fn finite_difference(params: &PolicyParams, h: f64, f: impl Fn(&PolicyParams) -> f64) -> Vec<f64> {
    let mut p = params.clone();
    let sizes: Vec<usize> = p.tensors().map(|t| t.len()).collect();
    let mut out = Vec::new();
    for (ti, &len) in sizes.iter().enumerate() {
        for k in 0..len {
            let orig = p.tensors().nth(ti).unwrap()[k];
            p.tensors_mut().nth(ti).unwrap()[k] = orig + h;
            let up = f(&p);
            p.tensors_mut().nth(ti).unwrap()[k] = orig - h;
            let down = f(&p);
            p.tensors_mut().nth(ti).unwrap()[k] = orig;
            out.push((up - down) / (2.0 * h));
        }
    }
    out
}

pub fn flatten(params: &PolicyParams) -> Vec<f64> {
    params.tensors().flat_map(|t| t.iter().copied()).collect()
}

/// Largest `|a - b| / max(|a|, |b|, floor)` over paired entries.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------- statistics

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        // Ties share the mean rank.
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = mean;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson correlation of tie-averaged ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}
