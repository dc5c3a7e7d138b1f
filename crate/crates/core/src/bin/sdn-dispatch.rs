use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sdn_dispatch::experiment::{load_settings, run_compare, ExperimentConfig, PolicySpec};
use sdn_dispatch::ppo::{train_with, Learner, TrainingConfig};
use sdn_dispatch::dispatch::DEFAULT_M;

#[derive(Parser)]
#[command(name = "sdn-dispatch", version, about = "Train and evaluate SDN request dispatchers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the scheduling function over a sequence of settings.
    Train(TrainArgs),
    /// Evaluate one policy on each setting and seed.
    Eval(EvalArgs),
    /// Evaluate several policies on each setting and seed.
    Compare(EvalArgs),
}

#[derive(Args)]
struct Common {
    /// Preset names (env1..env7) or TOML files, comma separated, in order.
    #[arg(long, value_delimiter = ',', required = true)]
    settings: Vec<String>,
    /// Comma separated seeds.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    /// Output directory for CSVs and checkpoints.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Scales the horizon and every time window.
    #[arg(long, default_value_t = 1.0)]
    time_scale: f64,
    /// Support size of the top-m projection.
    #[arg(long, default_value_t = DEFAULT_M)]
    m: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Continue from this checkpoint instead of a fresh initialisation.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    episodes: usize,
    /// Simulation steps per learning iteration.
    #[arg(long, default_value_t = 1024)]
    steps: usize,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Policies: rand, wrr, proposed (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    policy: Vec<String>,
    /// Checkpoint holding the trained scheduling function.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn csv_file(dir: &Path, name: &str) -> Result<File> {
    let path = dir.join(name);
    File::create(&path).with_context(|| format!("creating {}", path.display()))
}

fn train(args: TrainArgs) -> Result<()> {
    let c = &args.common;
    let settings = load_settings(&c.settings)?;
    let config = TrainingConfig {
        time_scale: c.time_scale,
        m: c.m,
        episodes_per_setting: args.episodes,
        steps_per_iteration: args.steps,
        ..Default::default()
    };
    create_out(&c.out)?;
    for &seed in &c.seeds {
        let learner = match &args.checkpoint {
            Some(path) => {
                let ckpt = sdn_dispatch::Checkpoint::load(path)?;
                let scheduler = ckpt.get("scheduler").cloned().context("checkpoint has no scheduler")?;
                let value = ckpt.get("value").cloned().context("checkpoint has no value network")?;
                Learner::from_networks(&config, scheduler, value)
            }
            None => Learner::new(&config, seed),
        };
        let out = train_with(learner, &settings, &config, seed, |i, ckpt| {
            let name = format!("checkpoint_seed{seed}_stage{i}_{}.ckpt", settings[i].name);
            ckpt.save(c.out.join(name))?;
            Ok(())
        })?;
        out.log.write_csv(csv_file(&c.out, &format!("training_seed{seed}.csv"))?)?;
        if let Some(last) = out.checkpoints.last() {
            last.save(c.out.join(format!("checkpoint_seed{seed}.ckpt")))?;
        }
        let iters = out.log.records.len();
        let best = out.log.records.iter().map(|r| r.cumulative_reward).fold(f64::NAN, f64::max);
        println!("seed {seed}: {iters} iterations, best iteration reward {best:.0}");
    }
    Ok(())
}

fn evaluate(args: EvalArgs, single: bool) -> Result<()> {
    let c = &args.common;
    if single && args.policy.len() != 1 {
        bail!("eval takes exactly one policy; use compare for several");
    }
    let policies = args
        .policy
        .iter()
        .map(|p| PolicySpec::parse(p, args.checkpoint.as_deref(), c.m))
        .collect::<Result<Vec<_>, _>>()?;
    let settings = load_settings(&c.settings)?;
    let config = ExperimentConfig { seeds: c.seeds.clone(), time_scale: c.time_scale, m: c.m };
    let report = run_compare(&settings, &policies, &config)?;
    create_out(&c.out)?;
    report.write_metrics_csv(csv_file(&c.out, "metrics.csv")?)?;
    report.write_distribution_csv(csv_file(&c.out, "distribution.csv")?)?;
    print!("{}", report.render_table());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train(a) => train(a),
        Command::Eval(a) => evaluate(a, true),
        Command::Compare(a) => evaluate(a, false),
    }
}
