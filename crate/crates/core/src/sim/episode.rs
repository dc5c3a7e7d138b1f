use std::io::Write;

use rand::SeedableRng;

use super::{Simulator, Step};
use crate::error::DispatchError;
use crate::policy::{DispatchPolicy, SimRng};
use crate::setting::NetworkSetting;

/// Stream id of the policy's random source; arrival streams use `1..=N_s`.
const POLICY_STREAM: u64 = 0;

pub fn episode_policy_rng(seed: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(POLICY_STREAM);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeOptions {
    /// Keep one [`StepRecord`] per generated request.
    pub record_steps: bool,
}

impl Default for EpisodeOptions {
    fn default() -> Self {
        Self { record_steps: true }
    }
}

/// One dispatch decision. `reward` is what was collected between this step and the next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub time: f64,
    pub switch: usize,
    pub action: usize,
    pub reward: f64,
    /// Mean response time of everything delivered up to this step.
    pub running_mean_tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub setting: String,
    pub policy: String,
    pub seed: u64,
    pub t_max: f64,
    pub steps: Vec<StepRecord>,
    pub cumulative_reward: f64,
    pub generated: u64,
    pub delivered: u64,
    pub mean_response_time: f64,
    /// Responses delivered per second of simulated time.
    pub throughput: f64,
    /// `distribution[s][c]`: requests switch `s` sent to controller `c`.
    pub distribution: Vec<Vec<u64>>,
    /// Dispatched request rate over capacity, per controller.
    pub offered_load: Vec<f64>,
    /// Time-averaged number of requests held by each controller.
    pub mean_queue_len: Vec<f64>,
    /// Mean FIFO wait (excluding service) per controller.
    pub mean_wait: Vec<f64>,
}

impl EpisodeLog {
    pub fn controller_share(&self, switch: usize) -> Vec<f64> {
        let row = &self.distribution[switch];
        let total: u64 = row.iter().sum();
        row.iter()
            .map(|&n| if total == 0 { 0.0 } else { n as f64 / total as f64 })
            .collect()
    }

    /// Per-step rows followed by a summary row.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "switch", "action", "reward", "running_mean_tau"])?;
        for s in &self.steps {
            w.write_record([
                s.time.to_string(),
                s.switch.to_string(),
                s.action.to_string(),
                s.reward.to_string(),
                s.running_mean_tau.to_string(),
            ])?;
        }
        w.write_record([
            self.t_max.to_string(),
            "all".to_string(),
            "summary".to_string(),
            self.cumulative_reward.to_string(),
            self.mean_response_time.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }
}

/// Runs one episode of `setting` under `policy` from an empty network.
pub fn run_episode<P: DispatchPolicy + ?Sized>(
    setting: &NetworkSetting,
    policy: &mut P,
    seed: u64,
    options: EpisodeOptions,
) -> Result<EpisodeLog, DispatchError> {
    policy.reset(setting);
    let mut sim = Simulator::new(setting, seed);
    let mut rng = episode_policy_rng(seed);
    let mut steps = Vec::new();
    let mut cumulative = 0.0;
    let mut last_reward: Option<usize> = None;

    loop {
        let step = sim.advance_to_next_request().expect("episode loop keeps the simulator consistent");
        let reward = match step {
            Step::Request { reward, .. } | Step::End { reward } => reward,
        };
        cumulative += reward;
        if let Some(i) = last_reward {
            let rec: &mut StepRecord = &mut steps[i];
            rec.reward += reward;
        }
        let Step::Request { request, .. } = step else { break };

        let ctx = sim.context().expect("pending request");
        let action = policy.select(&ctx, &mut rng)?;
        let running_mean_tau = sim.stats().mean_tau();
        sim.dispatch_request(action).map_err(|_| DispatchError::ActionOutOfRange {
            action,
            controllers: setting.num_controllers(),
        })?;
        if options.record_steps {
            steps.push(StepRecord {
                time: request.generated_at,
                switch: request.origin_switch,
                action,
                reward: 0.0,
                running_mean_tau,
            });
            last_reward = Some(steps.len() - 1);
        }
    }

    let stats = *sim.stats();
    let t_max = setting.t_max;
    let distribution = sim.distribution().to_vec();
    let offered_load = (0..setting.num_controllers())
        .map(|c| {
            let sent: u64 = distribution.iter().map(|row| row[c]).sum();
            sent as f64 / (setting.capacities[c] * t_max)
        })
        .collect();
    Ok(EpisodeLog {
        setting: setting.name.clone(),
        policy: policy.name(),
        seed,
        t_max,
        steps,
        cumulative_reward: cumulative,
        generated: sim.counts().generated,
        delivered: stats.delivered,
        mean_response_time: stats.mean_tau(),
        throughput: stats.delivered as f64 / t_max,
        distribution,
        offered_load,
        mean_queue_len: sim.controllers().iter().map(|c| c.mean_queue_len(t_max)).collect(),
        mean_wait: sim.controllers().iter().map(|c| c.mean_wait()).collect(),
    })
}
