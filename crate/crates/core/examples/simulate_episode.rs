//! Runs one episode of a preset under a baseline dispatcher and prints the
//! per-controller picture: offered load, mean queue length and mean wait.
//!
//! ```text
//! cargo run --release --example simulate_episode -- [preset] [rand|wrr] [time_scale]
//! ```

use sdn_dispatch::{run_episode, DispatchPolicy, EpisodeOptions, NetworkSetting, RandomPolicy, WrrPolicy};

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let preset = args.first().map_or("env5", String::as_str);
    let mut policy: Box<dyn DispatchPolicy> = match args.get(1).map_or("wrr", String::as_str) {
        "rand" => Box::new(RandomPolicy),
        _ => Box::new(WrrPolicy::default()),
    };
    let scale: f64 = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(0.1);

    let setting = NetworkSetting::preset(preset)?.time_scaled(scale)?;
    let log = run_episode(&setting, &mut policy, 1, EpisodeOptions { record_steps: false })?;

    println!("{} under {} for {:.1} s of simulated time", log.setting, log.policy, log.t_max);
    println!(
        "generated {}  delivered {}  throughput {:.0}/s  mean response time {:.3} ms",
        log.generated,
        log.delivered,
        log.throughput,
        log.mean_response_time * 1e3
    );
    for c in 0..setting.num_controllers() {
        println!(
            "  controller {c}: capacity {:>6.0}  load {:.3}  mean queue {:>9.2}  mean wait {:.3} ms",
            setting.capacities[c],
            log.offered_load[c],
            log.mean_queue_len[c],
            log.mean_wait[c] * 1e3
        );
    }
    Ok(())
}
