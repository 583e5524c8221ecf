use std::sync::Arc;

use uavnav::env::{EnvConfig, Event, Mode};
use uavnav::harness::{
    checkpoint_name, eval_checkpoint, load_run, read_metrics, replay, run_eval, run_train, run_train_with,
    PolicyController, PolicyMode, RunConfig, ScriptedController, StopReason, TrajectoryRecord, FINAL_CHECKPOINT,
    METRICS_FILE, SUMMARY_FILE,
};
use uavnav::nn::Checkpoint;
use uavnav::world::{Rect, Regions, Vec2, WorldConfig};
use uavnav::Error;

const OPEN: &str = r#"
seed = 3
max_iterations = 2
checkpoint_every = 1

[world]
goal_radius = 0.5
vehicle_radius = 0.3
arena = { min = [-5.0, -5.0], max = [5.0, 5.0] }
train = { start_region = { min = [-4.0, -3.0], max = [-3.0, 3.0] }, goal_region = { min = [3.0, -3.0], max = [4.0, 3.0] } }
test = { start_region = { min = [-4.0, -2.0], max = [-3.0, 2.0] }, goal_region = { min = [3.0, -2.0], max = [4.0, 2.0] } }

[ppo]
batch_min_steps = 200
epochs = 2

[output]
wall_clock = false
"#;

fn open_config(edit: impl FnOnce(String) -> String) -> RunConfig {
    RunConfig::parse(&edit(OPEN.to_string())).unwrap()
}

#[test]
fn zero_iterations_write_header_only() {
    let cfg = open_config(|t| t.replace("max_iterations = 2", "max_iterations = 0"));
    let dir = tempfile::tempdir().unwrap();
    let summary = run_train(&cfg, dir.path()).unwrap();
    assert_eq!(summary.iterations, 0);
    assert_eq!(summary.stop_reason, StopReason::MaxIterations);
    assert_eq!(summary.final_goal_rate, None);
    let text = std::fs::read_to_string(dir.path().join(METRICS_FILE)).unwrap();
    assert_eq!(
        text,
        "iteration,total_steps,episodes,mean_reward,goal_rate,collision_rate,timeout_rate,mean_ep_len,policy_loss,value_loss,entropy,wall_clock_s\n"
    );
    assert!(dir.path().join(FINAL_CHECKPOINT).exists());
    assert!(dir.path().join(SUMMARY_FILE).exists());
}

#[test]
fn goal_everywhere_stops_at_iteration_five() {
    // A goal radius longer than the arena diagonal: every first step wins.
    let cfg = open_config(|t| {
        t.replace("goal_radius = 0.5", "goal_radius = 20.0")
            .replace("max_iterations = 2", "max_iterations = 50")
            .replace("checkpoint_every = 1", "checkpoint_every = 2")
    });
    let dir = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    let summary = run_train_with(&cfg, dir.path(), |m| seen.push(m.clone())).unwrap();
    assert_eq!(summary.stop_reason, StopReason::EarlyStop);
    assert_eq!(summary.iterations, 5);
    assert_eq!(summary.final_goal_rate, Some(1.0));
    assert!(seen.iter().all(|m| m.goal_rate == 1.0 && m.mean_ep_len == 1.0));

    // Metrics parse back to exactly what the callback saw.
    assert_eq!(read_metrics(dir.path().join(METRICS_FILE)).unwrap(), seen);
    for it in [2, 4] {
        assert!(dir.path().join(checkpoint_name(it)).exists());
    }
    assert!(!dir.path().join(checkpoint_name(5)).exists());
    let ck = Checkpoint::load(dir.path().join(FINAL_CHECKPOINT)).unwrap();
    assert_eq!(ck.iteration, 5);
    // 200 one-step episodes: two minibatches, two epochs.
    assert_eq!(ck.adam.t, 5 * 2 * 2);
}

#[test]
fn invalid_config_leaves_no_output() {
    let text = OPEN.replace("batch_min_steps = 200", "batch_min_steps = 0");
    assert!(matches!(RunConfig::parse(&text), Err(Error::Config(_))));
    // A config edited after parsing is checked again before anything is written.
    let mut cfg = open_config(|t| t);
    cfg.ppo.batch_min_steps = 0;
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert!(matches!(run_train(&cfg, &out), Err(Error::Config(_))));
    assert!(!out.exists());
}

#[test]
fn misspelled_key_is_rejected_with_its_line() {
    let text = OPEN.replace("epochs = 2", "epoch = 2");
    let err = RunConfig::parse(&text).unwrap_err().to_string();
    let line = text.lines().position(|l| l.starts_with("epoch =")).unwrap() + 1;
    assert!(err.contains("epoch") && err.contains(&format!("line {line}")), "{err}");
}

fn scripted_world() -> Arc<EnvConfig> {
    let arena = Rect::new(Vec2::new(-10.0, -10.0), Vec2::new(10.0, 10.0));
    let regions = Regions {
        start_region: Rect::new(Vec2::new(-8.0, -8.0), Vec2::new(-4.0, 8.0)),
        goal_region: Rect::new(Vec2::new(4.0, -8.0), Vec2::new(8.0, 8.0)),
    };
    Arc::new(EnvConfig::new(WorldConfig::open(arena, regions)))
}

#[test]
fn scripted_controller_always_reaches_an_open_goal() {
    let env = scripted_world();
    let mut ctl = ScriptedController::new(&env);
    let report = run_eval(&env, &mut ctl, Mode::Test, 200, 1).unwrap();
    assert_eq!(report.goals, 200);
    assert_eq!(report.goal_rate, 1.0);
    assert!(report.outcomes.iter().all(|o| o.outcome == Event::GoalReached));
}

#[test]
fn zero_episodes_is_a_config_error() {
    let env = scripted_world();
    let mut ctl = ScriptedController::new(&env);
    assert!(matches!(
        run_eval(&env, &mut ctl, Mode::Test, 0, 1),
        Err(Error::Config(_))
    ));
}

fn trained_checkpoint(dir: &std::path::Path) -> std::path::PathBuf {
    let cfg = open_config(|t| t);
    run_train(&cfg, dir).unwrap().final_checkpoint
}

#[test]
fn evaluation_and_replay_of_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let path = trained_checkpoint(dir.path());

    for mode in [PolicyMode::Greedy, PolicyMode::Stochastic] {
        let a = eval_checkpoint(&path, Mode::Test, 12, 4, mode).unwrap();
        let b = eval_checkpoint(&path, Mode::Test, 12, 4, mode).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.goal_rate, a.goals as f64 / 12.0);
    }
    let report = eval_checkpoint(&path, Mode::Test, 3, 9, PolicyMode::Greedy).unwrap();

    let (ck, cfg) = load_run(&path).unwrap();
    let mut ctl = PolicyController::new(
        ck.params,
        &cfg.env,
        PolicyMode::Greedy,
        uavnav::harness::controller_seed(9),
    );
    let records = replay(&cfg.env, &mut ctl, Mode::Test, 9).unwrap();
    let TrajectoryRecord::Episode {
        outcome,
        steps,
        total_reward,
        start,
        ..
    } = records[0].clone()
    else {
        panic!("first record must be the episode header");
    };
    let first = &report.outcomes[0];
    assert_eq!((outcome, steps, start), (first.outcome, first.steps, first.start));
    assert_eq!(total_reward, first.total_reward);

    let mut sum = 0.0;
    let mut last_event = Event::None;
    for (k, r) in records[1..].iter().enumerate() {
        let TrajectoryRecord::Step {
            step, reward, event, ..
        } = *r
        else {
            panic!("only one header");
        };
        assert_eq!(step, k);
        sum += reward;
        last_event = event;
    }
    assert_eq!(records.len() - 1, steps);
    assert_eq!(sum, total_reward);
    assert_eq!(last_event, outcome);
    assert!(matches!(
        last_event,
        Event::GoalReached | Event::Collision | Event::Timeout
    ));
}

#[test]
fn corrupt_checkpoints_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let path = trained_checkpoint(dir.path());
    let bytes = std::fs::read(&path).unwrap();

    let cut = dir.path().join("cut.ppo");
    std::fs::write(&cut, &bytes[..bytes.len() / 3]).unwrap();
    let err = eval_checkpoint(&cut, Mode::Test, 1, 0, PolicyMode::Greedy).unwrap_err();
    assert!(matches!(err, Error::Checkpoint(_)), "{err}");

    let mut bad = bytes.clone();
    bad[7] = 99; // version
    let wrong = dir.path().join("version.ppo");
    std::fs::write(&wrong, &bad).unwrap();
    let err = eval_checkpoint(&wrong, Mode::Test, 1, 0, PolicyMode::Greedy).unwrap_err();
    assert!(err.to_string().contains("version"), "{err}");

    let missing = dir.path().join("missing.ppo");
    assert!(matches!(
        eval_checkpoint(&missing, Mode::Test, 1, 0, PolicyMode::Greedy),
        Err(Error::Io { .. })
    ));
}
