//! Command-line front end: `train`, `eval`, `replay` and `validate`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use uavnav::env::Mode;
use uavnav::harness::{
    self, controller_seed, load_config, load_run, run_train_with, write_jsonl, PolicyController, PolicyMode,
};
use uavnav::Error;

#[derive(Parser)]
#[command(name = "uavnav", version, about = "Train and evaluate PPO navigation policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy; writes metrics.csv, checkpoints and summary.json to DIR.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's rollout worker count.
        #[arg(long)]
        workers: Option<usize>,
        /// Suppress per-iteration progress on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Evaluate a checkpoint; prints one JSON summary line.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Test)]
        mode: ModeArg,
        /// Sample actions instead of taking the most probable one.
        #[arg(long)]
        stochastic: bool,
        /// Write per-episode outcome records (JSON lines) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Record one greedy episode as JSON lines.
    Replay {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Test)]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a config without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Train,
    Test,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Train => Mode::Train,
            ModeArg::Test => Mode::Test,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Contract(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(cli: Cli) -> uavnav::Result<()> {
    match cli.command {
        Command::Train {
            config,
            seed,
            out,
            workers,
            quiet,
        } => train(&config, seed, &out, workers, quiet),
        Command::Eval {
            checkpoint,
            episodes,
            seed,
            mode,
            stochastic,
            out,
        } => {
            let policy_mode = if stochastic {
                PolicyMode::Stochastic
            } else {
                PolicyMode::Greedy
            };
            let report = harness::eval_checkpoint(&checkpoint, mode.into(), episodes, seed, policy_mode)?;
            if let Some(out) = out {
                write_jsonl(&out, &report.outcomes)?;
            }
            let summary = serde_json::json!({
                "mode": report.mode,
                "episodes": report.episodes,
                "goals": report.goals,
                "goal_rate": report.goal_rate,
            });
            println!("{summary}");
            Ok(())
        }
        Command::Replay {
            checkpoint,
            seed,
            mode,
            out,
        } => {
            let (ck, cfg) = load_run(&checkpoint)?;
            let mut ctl = PolicyController::new(ck.params, &cfg.env, PolicyMode::Greedy, controller_seed(seed));
            let records = harness::replay(&cfg.env, &mut ctl, mode.into(), seed)?;
            write_jsonl(&out, &records)?;
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            cfg.validate()?;
            println!(
                "ok: {} obstacles, {} parameters",
                cfg.env.world.obstacles.len(),
                uavnav::nn::PolicyParams::zeros(cfg.architecture()).num_params()
            );
            Ok(())
        }
    }
}

fn train(config: &Path, seed: Option<u64>, out: &Path, workers: Option<usize>, quiet: bool) -> uavnav::Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(workers) = workers {
        cfg.workers = workers;
    }
    let summary = run_train_with(&cfg, out, |m| {
        if !quiet {
            eprintln!(
                "iter {:>4}  steps {:>6}  episodes {:>5}  reward {:>9.2}  goal {:.3}  collision {:.3}  timeout {:.3}",
                m.iteration, m.total_steps, m.episodes, m.mean_reward, m.goal_rate, m.collision_rate, m.timeout_rate
            );
        }
    })?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}
