//! Evaluation and comparison of dispatch policies over settings and seeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::baselines::{RandomPolicy, WrrPolicy};
use crate::dispatch::{LearnedPolicy, DEFAULT_M};
use crate::error::{CheckpointError, DispatchError, SettingError};
use crate::nn::Checkpoint;
use crate::policy::DispatchPolicy;
use crate::setting::NetworkSetting;
use crate::sim::{run_episode, EpisodeLog, EpisodeOptions};

/// Which dispatcher to run. Learned policies carry their network.
#[derive(Debug, Clone)]
pub enum PolicySpec {
    Random,
    Wrr,
    Learned(LearnedPolicy),
}

impl PolicySpec {
    /// Parses `rand`, `wrr` or `proposed` (the last one needs `checkpoint`).
    pub fn parse(name: &str, checkpoint: Option<&Path>, m: usize) -> Result<Self, ExperimentError> {
        match name {
            "rand" | "random" => Ok(Self::Random),
            "wrr" => Ok(Self::Wrr),
            "proposed" | "learned" => {
                let path = checkpoint.ok_or(ExperimentError::MissingCheckpoint)?;
                Ok(Self::Learned(load_learned_policy(path, m)?))
            }
            other => Err(ExperimentError::UnknownPolicy(other.to_string())),
        }
    }

    pub fn name(&self) -> String {
        self.build().name()
    }

    pub fn build(&self) -> Box<dyn DispatchPolicy> {
        match self {
            Self::Random => Box::new(RandomPolicy),
            Self::Wrr => Box::new(WrrPolicy::default()),
            Self::Learned(p) => Box::new(p.clone()),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("unknown policy `{0}` (expected rand, wrr or proposed)")]
    UnknownPolicy(String),
    #[error("the proposed policy needs a checkpoint")]
    MissingCheckpoint,
    #[error(transparent)]
    Setting(#[from] SettingError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error("failed to write results: {0}")]
    Output(#[from] csv::Error),
}

/// Loads the `scheduler` network from a checkpoint file.
pub fn load_learned_policy(path: &Path, m: usize) -> Result<LearnedPolicy, CheckpointError> {
    let net = Checkpoint::load(path)?.take("scheduler")?;
    Ok(LearnedPolicy::new(net, m))
}

/// Loads settings by preset name or file path.
pub fn load_settings<S: AsRef<str>>(names: &[S]) -> Result<Vec<NetworkSetting>, SettingError> {
    names.iter().map(|n| NetworkSetting::load(n.as_ref())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    /// Multiplies `t_max` and every time window (see [`NetworkSetting::time_scaled`]).
    pub time_scale: f64,
    pub m: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self { seeds: (1..=5).collect(), time_scale: 1.0, m: DEFAULT_M }
    }
}

/// Runs `policy` on `setting` once per seed, without per-step records.
pub fn run_eval(
    setting: &NetworkSetting,
    policy: &PolicySpec,
    config: &ExperimentConfig,
) -> Result<Vec<EpisodeLog>, ExperimentError> {
    let scaled = setting.clone().time_scaled(config.time_scale)?;
    let mut out = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let mut p = policy.build();
        out.push(run_episode(&scaled, &mut p, seed, EpisodeOptions { record_steps: false })?);
    }
    Ok(out)
}

/// Every episode of a comparison, keyed by policy then setting.
#[derive(Debug, Clone, Default)]
pub struct ComparisonReport {
    pub episodes: Vec<EpisodeLog>,
}

/// Seed-averaged metrics of one (policy, setting) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub policy: String,
    pub setting: String,
    pub episodes: usize,
    pub mean_response_time: f64,
    pub std_response_time: f64,
    pub throughput: f64,
    pub cumulative_reward: f64,
}

impl ComparisonReport {
    pub fn summaries(&self) -> Vec<Summary> {
        let mut cells: BTreeMap<(String, String), Vec<&EpisodeLog>> = BTreeMap::new();
        for e in &self.episodes {
            cells.entry((e.setting.clone(), e.policy.clone())).or_default().push(e);
        }
        cells
            .into_iter()
            .map(|((setting, policy), eps)| {
                let n = eps.len() as f64;
                let mean = |f: &dyn Fn(&EpisodeLog) -> f64| eps.iter().map(|e| f(e)).sum::<f64>() / n;
                let m_tau = mean(&|e| e.mean_response_time);
                let var = mean(&|e| (e.mean_response_time - m_tau).powi(2));
                Summary {
                    policy,
                    setting,
                    episodes: eps.len(),
                    mean_response_time: m_tau,
                    std_response_time: var.sqrt(),
                    throughput: mean(&|e| e.throughput),
                    cumulative_reward: mean(&|e| e.cumulative_reward),
                }
            })
            .collect()
    }

    pub fn summary(&self, policy: &str, setting: &str) -> Option<Summary> {
        self.summaries().into_iter().find(|s| s.policy == policy && s.setting == setting)
    }

    /// One row per episode.
    pub fn write_metrics_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "policy",
            "setting",
            "seed",
            "t_max",
            "generated",
            "delivered",
            "mean_response_time",
            "throughput",
            "cumulative_reward",
        ])?;
        for e in &self.episodes {
            w.write_record([
                e.policy.clone(),
                e.setting.clone(),
                e.seed.to_string(),
                e.t_max.to_string(),
                e.generated.to_string(),
                e.delivered.to_string(),
                e.mean_response_time.to_string(),
                e.throughput.to_string(),
                e.cumulative_reward.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per (episode, switch, controller) with the request count and share.
    pub fn write_distribution_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["policy", "setting", "seed", "switch", "controller", "requests", "share"])?;
        for e in &self.episodes {
            for (s, row) in e.distribution.iter().enumerate() {
                let share = e.controller_share(s);
                for (c, &n) in row.iter().enumerate() {
                    w.write_record([
                        e.policy.clone(),
                        e.setting.clone(),
                        e.seed.to_string(),
                        s.to_string(),
                        c.to_string(),
                        n.to_string(),
                        share[c].to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text table of the seed-averaged summaries.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<10} {:<10} {:>5} {:>14} {:>12} {:>12} {:>16}",
            "setting", "policy", "runs", "mean_tau_ms", "std_ms", "throughput", "cum_reward"
        );
        for r in self.summaries() {
            let _ = writeln!(
                s,
                "{:<10} {:<10} {:>5} {:>14.4} {:>12.4} {:>12.1} {:>16.4e}",
                r.setting,
                r.policy,
                r.episodes,
                r.mean_response_time * 1e3,
                r.std_response_time * 1e3,
                r.throughput,
                r.cumulative_reward
            );
        }
        s
    }
}

/// Runs every policy on every setting for every seed.
pub fn run_compare(
    settings: &[NetworkSetting],
    policies: &[PolicySpec],
    config: &ExperimentConfig,
) -> Result<ComparisonReport, ExperimentError> {
    let mut report = ComparisonReport::default();
    for setting in settings {
        for policy in policies {
            report.episodes.extend(run_eval(setting, policy, config)?);
        }
    }
    Ok(report)
}
