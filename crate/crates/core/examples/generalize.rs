//! Trains on the two-controller settings Env1-3, then evaluates the same
//! scheduling function on larger testing settings against Rand and WRR.
//!
//! ```text
//! cargo run --release --example generalize -- [time_scale] [seed] [testing presets...]
//! ```

use sdn_dispatch::experiment::{load_settings, run_compare, ExperimentConfig, PolicySpec};
use sdn_dispatch::ppo::{train, TrainingConfig};
use sdn_dispatch::LearnedPolicy;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let time_scale: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.05);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(11);
    let mut testing: Vec<String> = args.collect();
    if testing.is_empty() {
        testing = vec!["env4".into(), "env6".into()];
    }

    let training = load_settings(&["env1", "env2", "env3"])?;
    let config = TrainingConfig { time_scale, ..Default::default() };
    let out = train(&training, &config, seed)?;
    println!("trained {} iterations over {} settings", out.log.records.len(), training.len());
    for (i, s) in training.iter().enumerate() {
        for ep in 0..config.episodes_per_setting {
            let taus: Vec<f64> = out.log.episode(i, ep).map(|r| r.mean_tau * 1e3).collect();
            let tail = &taus[taus.len().saturating_sub(5)..];
            println!("  {} episode {ep}: mean tau first {:.2} ms, last iterations {:.2?} ms", s.name, taus[0], tail);
        }
    }

    let learned = LearnedPolicy::new(out.scheduler, config.m);
    let policies = [PolicySpec::Learned(learned), PolicySpec::Random, PolicySpec::Wrr];
    let eval = ExperimentConfig { seeds: vec![201, 202, 203], time_scale, m: config.m };
    let report = run_compare(&load_settings(&testing)?, &policies, &eval)?;
    print!("{}", report.render_table());

    // Where the first switch of each testing setting sends its requests.
    for e in report.episodes.iter().filter(|e| e.seed == 201) {
        let share: Vec<String> = e.controller_share(0).iter().map(|p| format!("{p:.3}")).collect();
        let load: Vec<String> = e.offered_load.iter().map(|p| format!("{p:.2}")).collect();
        println!("{:<6} {:<9} switch0 share [{}]  load [{}]", e.setting, e.policy, share.join(", "), load.join(", "));
    }
    Ok(())
}
