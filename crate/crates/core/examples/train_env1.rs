//! Trains the scheduling function on Env1 and compares it with Rand and WRR.
//!
//! ```text
//! cargo run --release --example train_env1 -- [time_scale] [episodes]
//! ```

use std::time::Instant;

use sdn_dispatch::experiment::{run_compare, ExperimentConfig, PolicySpec};
use sdn_dispatch::ppo::{train, TrainingConfig};
use sdn_dispatch::{LearnedPolicy, NetworkSetting};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let time_scale: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.05);
    let episodes: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2);

    let env1 = NetworkSetting::preset("env1")?;
    let config = TrainingConfig { time_scale, episodes_per_setting: episodes, ..Default::default() };

    let started = Instant::now();
    let out = train(std::slice::from_ref(&env1), &config, 7)?;
    println!("trained {} iterations in {:.1?}", out.log.records.len(), started.elapsed());
    for r in out.log.records.iter().step_by(10) {
        println!(
            "  ep {} iter {:>4}  t={:>7.2}s  reward={:>10.0}  mean_tau={:.3} ms",
            r.episode,
            r.iteration,
            r.sim_time,
            r.cumulative_reward,
            r.mean_tau * 1e3
        );
    }

    let learned = LearnedPolicy::new(out.scheduler, config.m);
    let policies = [PolicySpec::Learned(learned), PolicySpec::Random, PolicySpec::Wrr];
    let eval = ExperimentConfig { seeds: vec![101, 102, 103], time_scale, m: config.m };
    let report = run_compare(&[env1], &policies, &eval)?;
    print!("{}", report.render_table());
    Ok(())
}
