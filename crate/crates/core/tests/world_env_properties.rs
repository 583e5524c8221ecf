mod common;

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uavnav::env::{heading_error, observe, Env, EnvConfig, EpisodeConfig, Event, GoalPoint, Mode};
use uavnav::vehicle::{ActionIndex, VehicleState};
use uavnav::world::{
    collision, point_in_obstacle, ray_distance, render_depth, wall_clearance, Obstacle, Rect, Regions, Vec2,
    WorldConfig,
};

use common::{random_obstacle, random_world, ray_march_oracle};

fn mirror_obstacle(o: &Obstacle) -> Obstacle {
    match *o {
        Obstacle::Cylinder { center, radius } => Obstacle::Cylinder {
            center: Vec2::new(center.x, -center.y),
            radius,
        },
        Obstacle::Box {
            center,
            half_extents,
            yaw,
        } => Obstacle::Box {
            center: Vec2::new(center.x, -center.y),
            half_extents,
            yaw: -yaw,
        },
    }
}

fn mirror_rect(r: &Rect) -> Rect {
    Rect::new(Vec2::new(r.min.x, -r.max.y), Vec2::new(r.max.x, -r.min.y))
}

fn mirror_world(w: &WorldConfig) -> WorldConfig {
    let regions = |r: &Regions| Regions {
        start_region: mirror_rect(&r.start_region),
        goal_region: mirror_rect(&r.goal_region),
    };
    WorldConfig {
        arena: mirror_rect(&w.arena),
        obstacles: w.obstacles.iter().map(mirror_obstacle).collect(),
        train: regions(&w.train),
        test: regions(&w.test),
        ..w.clone()
    }
}

fn world_from_seed(seed: u64, obstacles: usize) -> WorldConfig {
    random_world(&mut ChaCha8Rng::seed_from_u64(seed), obstacles)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn depth_values_within_range(seed in any::<u64>(), k in 0usize..6, x in -9.9..9.9f64, y in -9.9..9.9f64, yaw in -PI..PI) {
        let w = world_from_seed(seed, k);
        let img = render_depth(&VehicleState::new(x, y, yaw), &w, &w.camera);
        prop_assert_eq!(img.data.len(), 108);
        prop_assert!(img.data.iter().all(|&d| (0.0..=w.camera.max_range).contains(&d)));
    }

    #[test]
    fn inserting_an_obstacle_never_deepens(seed in any::<u64>(), k in 0usize..6, x in -9.9..9.9f64, y in -9.9..9.9f64, yaw in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = random_world(&mut rng, k);
        let pose = VehicleState::new(x, y, yaw);
        let before = render_depth(&pose, &w, &w.camera);
        let area = w.arena;
        w.obstacles.push(random_obstacle(&mut rng, &area));
        let after = render_depth(&pose, &w, &w.camera);
        for (a, b) in after.data.iter().zip(&before.data) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn ray_distance_matches_marching(seed in any::<u64>(), k in 0usize..6, x in -9.9..9.9f64, y in -9.9..9.9f64, theta in -PI..PI) {
        let w = world_from_seed(seed, k);
        let (o, d) = (Vec2::new(x, y), Vec2::from_angle(theta));
        let got = ray_distance(o, d, &w, 10.0);
        prop_assert!((got - ray_march_oracle(o, d, &w, 10.0)).abs() <= 1e-6);
    }

    #[test]
    fn collision_is_obstacle_or_wall_test(seed in any::<u64>(), k in 0usize..6, x in -10.5..10.5f64, y in -10.5..10.5f64) {
        let w = world_from_seed(seed, k);
        let p = Vec2::new(x, y);
        let expect = wall_clearance(p, &w.arena) <= w.vehicle_radius
            || w.obstacles.iter().any(|o| point_in_obstacle(p, o, w.vehicle_radius));
        prop_assert_eq!(collision(p, &w), expect);
    }

    #[test]
    fn mirrored_scene_mirrors_depth(seed in any::<u64>(), k in 0usize..6, x in -9.9..9.9f64, y in -9.9..9.9f64, yaw in -PI..PI) {
        let w = world_from_seed(seed, k);
        let m = mirror_world(&w);
        let a = render_depth(&VehicleState::new(x, y, yaw), &w, &w.camera);
        let b = render_depth(&VehicleState::new(x, -y, -yaw), &m, &m.camera);
        for r in 0..a.rows {
            for c in 0..a.cols {
                prop_assert!((a.get(r, c) - b.get(r, a.cols - 1 - c)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mirrored_observation_negates_heading(seed in any::<u64>(), x in -9.0..9.0f64, y in -9.0..9.0f64, yaw in -3.1..3.1f64, gx in -9.0..9.0f64, gy in -9.0..9.0f64) {
        let w = world_from_seed(seed, 3);
        let m = mirror_world(&w);
        let a = observe(&VehicleState::new(x, y, yaw), &GoalPoint { x: gx, y: gy }, &w);
        let b = observe(&VehicleState::new(x, -y, -yaw), &GoalPoint { x: gx, y: -gy }, &m);
        prop_assert!((a.distance - b.distance).abs() < 1e-12);
        // At exactly pi the wrap convention keeps +pi on both sides.
        prop_assume!(a.heading_error.abs() < PI - 1e-9);
        prop_assert!((a.heading_error + b.heading_error).abs() < 1e-9);
    }

    #[test]
    fn heading_error_ignores_full_turns(x in -9.0..9.0f64, y in -9.0..9.0f64, yaw in -PI..PI, gx in -9.0..9.0f64, gy in -9.0..9.0f64, k in -3i32..=3) {
        let g = GoalPoint { x: gx, y: gy };
        let s = VehicleState { x, y, yaw };
        let turned = VehicleState { x, y, yaw: yaw + k as f64 * TAU };
        let (a, b) = (heading_error(&s, &g), heading_error(&turned, &g));
        prop_assert!(a > -PI && a <= PI);
        // Both sides of the branch cut are the same direction.
        let d = (a - b).abs();
        prop_assert!(d < 1e-9 || (d - TAU).abs() < 1e-9);
    }

    #[test]
    fn every_episode_ends_with_exactly_one_event(seed in any::<u64>(), actions in proptest::collection::vec(0usize..15, 1..60)) {
        let w = world_from_seed(seed, 4);
        let mut cfg = EnvConfig::new(w);
        cfg.episode.max_steps = 50;
        let mut env = Env::new(Arc::new(cfg), seed);
        env.reset_to(EpisodeConfig {
            start: VehicleState::new(-8.5, 0.0, 0.0),
            goal: GoalPoint { x: 8.5, y: 0.0 },
            max_steps: 50,
            seed,
        });
        let mut events = Vec::new();
        let mut i = 0;
        while !env.is_done() {
            let out = env.step(ActionIndex::new(actions[i % actions.len()]).unwrap()).unwrap();
            events.push(out.event);
            prop_assert_eq!(out.done, out.event != Event::None);
            i += 1;
        }
        let terminal: Vec<_> = events.iter().filter(|e| **e != Event::None).collect();
        prop_assert_eq!(terminal.len(), 1);
        prop_assert_eq!(events.last(), terminal.first().copied());
        prop_assert!(events.len() <= 50);
    }
}

#[test]
fn reset_samples_stay_in_their_rectangles() {
    let arena = Rect::new(Vec2::new(0.0, 0.0), Vec2::new(20.0, 20.0));
    let train = Regions {
        start_region: Rect::new(Vec2::new(1.0, 1.0), Vec2::new(3.0, 3.0)),
        goal_region: Rect::new(Vec2::new(17.0, 17.0), Vec2::new(19.0, 19.0)),
    };
    let test = Regions {
        start_region: Rect::new(Vec2::new(1.0, 16.0), Vec2::new(3.0, 19.0)),
        goal_region: Rect::new(Vec2::new(16.0, 1.0), Vec2::new(19.0, 3.0)),
    };
    let mut w = WorldConfig::open(arena, train);
    w.test = test;
    let mut env = Env::new(Arc::new(EnvConfig::new(w)), 11);
    for i in 0..2000 {
        let (mode, regions) = if i % 2 == 0 {
            (Mode::Train, &train)
        } else {
            (Mode::Test, &test)
        };
        env.reset(mode).unwrap();
        let ep = env.episode().unwrap();
        assert!(regions.start_region.contains(ep.start.position()));
        assert!(regions.goal_region.contains(ep.goal.position()));
        assert!(ep.start.yaw > -PI && ep.start.yaw <= PI);
        assert_eq!(env.step_count(), 0);
    }
}

#[test]
fn stepping_a_finished_episode_is_an_error() {
    let w = world_from_seed(5, 0);
    let mut cfg = EnvConfig::new(w);
    cfg.episode.max_steps = 3;
    let mut env = Env::new(Arc::new(cfg), 0);
    let idle = ActionIndex::new(2).unwrap();
    assert!(matches!(env.step(idle), Err(uavnav::Error::Contract(_))));
    env.reset(Mode::Train).unwrap();
    for _ in 0..3 {
        env.step(idle).unwrap();
    }
    assert!(env.is_done());
    assert!(matches!(env.step(idle), Err(uavnav::Error::Contract(_))));
}
