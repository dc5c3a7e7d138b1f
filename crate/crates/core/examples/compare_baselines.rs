//! Rand against WRR on every testing preset, written as CSV plus a table.
//!
//! ```text
//! cargo run --release --example compare_baselines -- [time_scale] [out_dir]
//! ```

use std::fs::File;

use sdn_dispatch::experiment::{load_settings, run_compare, ExperimentConfig, PolicySpec};

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let time_scale: f64 = args.first().map(|s| s.parse()).transpose()?.unwrap_or(0.05);
    let out = std::path::PathBuf::from(args.get(1).map_or("baselines_out", String::as_str));

    let settings = load_settings(&["env4", "env5", "env6", "env7"])?;
    let config = ExperimentConfig { seeds: vec![1, 2, 3], time_scale, ..Default::default() };
    let report = run_compare(&settings, &[PolicySpec::Random, PolicySpec::Wrr], &config)?;

    std::fs::create_dir_all(&out)?;
    report.write_metrics_csv(File::create(out.join("metrics.csv"))?)?;
    report.write_distribution_csv(File::create(out.join("distribution.csv"))?)?;
    print!("{}", report.render_table());
    println!("CSV files written to {}", out.display());
    Ok(())
}
