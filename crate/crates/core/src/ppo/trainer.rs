use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::adam::Adam;
use super::config::TrainingConfig;
use super::gae::{gae, normalize};
use super::surrogate::{surrogate_gradient_into, value_gradient_into, ClipRegion, Transition};
use crate::dispatch::features::{extract_all, GLOBAL_DIM};
use crate::dispatch::{compute_priorities, project, sample_action, scheduler_spec, LearnedPolicy};
use crate::error::{DispatchError, TrainError};
use crate::nn::{Checkpoint, MlpSpec, OutputHead, ParamStore};
use crate::policy::SimRng;
use crate::setting::NetworkSetting;
use crate::sim::{episode_policy_rng, Simulator, Step};

pub fn value_spec() -> MlpSpec {
    MlpSpec::new(GLOBAL_DIM, OutputHead::Identity)
}

/// Mixes a base seed with a salt (splitmix64 finaliser).
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` consecutive transitions plus what follows them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub transitions: Vec<Transition>,
    /// `V` of the state after the last transition; 0 when the episode ended.
    pub bootstrap_value: f64,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Advantages {
    /// GAE estimates before normalisation.
    pub raw: Vec<f64>,
    /// What the policy update uses.
    pub normalized: Vec<f64>,
    /// Value-function regression targets, scaled reward units.
    pub returns: Vec<f64>,
}

/// GAE over a trajectory whose values were computed with the current value
/// network. Rewards are multiplied by `reward_scale` first.
pub fn estimate_advantages(traj: &Trajectory, config: &TrainingConfig) -> Result<Advantages, TrainError> {
    let rewards: Vec<f64> = traj.transitions.iter().map(|t| t.reward * config.reward_scale).collect();
    let values: Vec<f64> = traj.transitions.iter().map(|t| t.value).collect();
    let bootstrap = if traj.terminal { 0.0 } else { traj.bootstrap_value };
    let (raw, returns) = gae(&rewards, &values, bootstrap, config.gamma, config.gae_lambda)?;
    let mut normalized = raw.clone();
    if config.normalize_advantages {
        normalize(&mut normalized);
    }
    Ok(Advantages { raw, normalized, returns })
}

/// Summary of one policy/value update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    pub active: usize,
    pub clipped: usize,
    pub zero_probability: usize,
    pub mean_value_loss: f64,
}

/// The scheduling and value networks with their optimiser state.
#[derive(Debug, Clone)]
pub struct Learner {
    pub scheduler: ParamStore,
    pub value: ParamStore,
    scheduler_opt: Adam,
    value_opt: Adam,
}

impl Learner {
    pub fn new(config: &TrainingConfig, seed: u64) -> Self {
        let scheduler = ParamStore::init(scheduler_spec(), derive_seed(seed, 1));
        let value = ParamStore::init(value_spec(), derive_seed(seed, 2));
        Self::from_networks(config, scheduler, value)
    }

    pub fn from_networks(config: &TrainingConfig, scheduler: ParamStore, value: ParamStore) -> Self {
        let opt = |n: usize, lr: f64| Adam::new(n, lr, config.adam_beta1, config.adam_beta2, config.adam_eps);
        Self {
            scheduler_opt: opt(scheduler.len(), config.policy_lr),
            value_opt: opt(value.len(), config.value_lr),
            scheduler,
            value,
        }
    }

    pub fn policy(&self, m: usize) -> LearnedPolicy {
        LearnedPolicy::new(self.scheduler.clone(), m)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let mut c = Checkpoint::default();
        c.insert("scheduler", self.scheduler.clone());
        c.insert("value", self.value.clone());
        c
    }

    /// Minibatch epochs of clipped-surrogate ascent on the scheduling network
    /// and squared-error descent on the value network. `θ_old` is implicit:
    /// the behaviour probabilities stored in the trajectory.
    pub fn update_iteration(
        &mut self,
        traj: &Trajectory,
        adv: &Advantages,
        config: &TrainingConfig,
        rng: &mut SimRng,
    ) -> Result<UpdateStats, TrainError> {
        let n = traj.transitions.len();
        if n == 0 {
            return Err(TrainError::EmptyTrajectory);
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut stats = UpdateStats::default();
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        for epoch in 0..config.epochs {
            order.shuffle(rng);
            for (minibatch, batch) in order.chunks(config.minibatch_size).enumerate() {
                self.scheduler.zero_grad();
                self.value.zero_grad();
                let mut grad_s = std::mem::take(&mut self.scheduler.grads);
                let mut grad_v = std::mem::take(&mut self.value.grads);
                for &i in batch {
                    let t = &traj.transitions[i];
                    let step = surrogate_gradient_into(
                        t,
                        adv.normalized[i],
                        &self.scheduler,
                        config.m,
                        config.clip_epsilon,
                        &config.features,
                        &mut grad_s,
                    )?;
                    match step.region {
                        ClipRegion::Active => stats.active += 1,
                        ClipRegion::ClippedLow | ClipRegion::ClippedHigh => stats.clipped += 1,
                        ClipRegion::ZeroProbability => stats.zero_probability += 1,
                    }
                    let v = value_gradient_into(&t.globals, adv.returns[i], &self.value, &mut grad_v)?;
                    loss_sum += 0.5 * (v - adv.returns[i]).powi(2);
                    loss_count += 1;
                }
                let inv = 1.0 / batch.len() as f64;
                grad_s.iter_mut().for_each(|g| *g *= inv);
                grad_v.iter_mut().for_each(|g| *g *= inv);
                if grad_s.iter().any(|g| !g.is_finite()) {
                    return Err(TrainError::NonFiniteGradient { which: "scheduler", epoch, minibatch });
                }
                if grad_v.iter().any(|g| !g.is_finite()) {
                    return Err(TrainError::NonFiniteGradient { which: "value", epoch, minibatch });
                }
                self.scheduler_opt.step(&mut self.scheduler.params, &grad_s, true);
                self.value_opt.step(&mut self.value.params, &grad_v, false);
                self.scheduler.grads = grad_s;
                self.value.grads = grad_v;
            }
        }
        stats.mean_value_loss = loss_sum / loss_count.max(1) as f64;
        Ok(stats)
    }
}

/// One learning iteration of the training curve.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub setting_index: usize,
    pub setting: String,
    pub episode: usize,
    pub iteration: usize,
    /// Simulated time at the end of the iteration.
    pub sim_time: f64,
    pub steps: usize,
    /// Sum of the rewards collected over the iteration, 1/s.
    pub cumulative_reward: f64,
    /// Mean response time of the responses delivered during the iteration.
    pub mean_tau: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub records: Vec<IterationRecord>,
}

impl TrainingLog {
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "setting_index",
            "setting",
            "episode",
            "iteration",
            "sim_time",
            "steps",
            "cumulative_reward",
            "mean_tau",
        ])?;
        for r in &self.records {
            w.write_record([
                r.setting_index.to_string(),
                r.setting.clone(),
                r.episode.to_string(),
                r.iteration.to_string(),
                r.sim_time.to_string(),
                r.steps.to_string(),
                r.cumulative_reward.to_string(),
                r.mean_tau.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Records of one (setting, episode) pair, in order.
    pub fn episode(&self, setting_index: usize, episode: usize) -> impl Iterator<Item = &IterationRecord> {
        self.records
            .iter()
            .filter(move |r| r.setting_index == setting_index && r.episode == episode)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub scheduler: ParamStore,
    pub value: ParamStore,
    pub log: TrainingLog,
    /// One checkpoint per completed setting, in training order.
    pub checkpoints: Vec<Checkpoint>,
}

/// Collects up to `n` transitions from a running episode. `step` is the
/// simulator's latest outcome and is advanced in place.
fn collect(
    sim: &mut Simulator,
    step: &mut Step,
    learner: &Learner,
    config: &TrainingConfig,
    rng: &mut SimRng,
) -> Result<Trajectory, TrainError> {
    let mut transitions = Vec::with_capacity(config.steps_per_iteration);
    while transitions.len() < config.steps_per_iteration {
        let Step::Request { globals, .. } = *step else { break };
        let ctx = sim.context().expect("request pending");
        let features = extract_all(ctx.view, ctx.setting, ctx.switch, ctx.now, &config.features);
        let dist = project(&compute_priorities(&learner.scheduler, &features, &config.features)?, config.m)?;
        let action = sample_action(&dist, rng);
        let value = learner.value.forward(&globals.to_input()).map_err(DispatchError::from)?;
        sim.dispatch_request(action).expect("sampled action is in range");
        *step = sim.advance_to_next_request().expect("advance after dispatch");
        let reward = match *step {
            Step::Request { reward, .. } | Step::End { reward } => reward,
        };
        transitions.push(Transition {
            features,
            globals,
            action,
            prob_old: dist.probabilities[action],
            reward,
            value,
        });
    }
    let (terminal, bootstrap_value) = match step {
        Step::End { .. } => (true, 0.0),
        Step::Request { globals, .. } => {
            (false, learner.value.forward(&globals.to_input()).map_err(DispatchError::from)?)
        }
    };
    Ok(Trajectory { transitions, bootstrap_value, terminal })
}

/// Trains on one episode of `setting` (already time-scaled), appending to `log`.
pub fn train_episode(
    learner: &mut Learner,
    setting: &NetworkSetting,
    setting_index: usize,
    episode: usize,
    episode_seed: u64,
    config: &TrainingConfig,
    log: &mut TrainingLog,
) -> Result<(), TrainError> {
    let mut sim = Simulator::with_features(setting, episode_seed, &config.features);
    let mut rng = episode_policy_rng(episode_seed);
    let mut shuffle_rng = SimRng::seed_from_u64(derive_seed(episode_seed, 0x5eed));
    let mut step = sim.advance_to_next_request().expect("fresh simulator");
    let mut iteration = 0;
    loop {
        let before = *sim.stats();
        let traj = collect(&mut sim, &mut step, learner, config, &mut rng)?;
        if traj.transitions.is_empty() {
            break;
        }
        let after = *sim.stats();
        let delivered = after.delivered - before.delivered;
        log.records.push(IterationRecord {
            setting_index,
            setting: setting.name.clone(),
            episode,
            iteration,
            sim_time: sim.now(),
            steps: traj.transitions.len(),
            cumulative_reward: traj.transitions.iter().map(|t| t.reward).sum(),
            mean_tau: if delivered == 0 { 0.0 } else { (after.sum_tau - before.sum_tau) / delivered as f64 },
        });
        let adv = estimate_advantages(&traj, config)?;
        learner.update_iteration(&traj, &adv, config, &mut shuffle_rng)?;
        iteration += 1;
        if traj.terminal {
            break;
        }
    }
    Ok(())
}

/// Sequential training over `settings`, `episodes_per_setting` episodes each.
pub fn train(settings: &[NetworkSetting], config: &TrainingConfig, seed: u64) -> Result<TrainOutput, TrainError> {
    train_with(Learner::new(config, seed), settings, config, seed, |_, _| Ok(()))
}

/// Like [`train`] but continues from `learner` and calls `on_setting` with
/// each setting's checkpoint as soon as it is complete.
pub fn train_with<F>(
    mut learner: Learner,
    settings: &[NetworkSetting],
    config: &TrainingConfig,
    seed: u64,
    mut on_setting: F,
) -> Result<TrainOutput, TrainError>
where
    F: FnMut(usize, &Checkpoint) -> Result<(), TrainError>,
{
    config.validate()?;
    if settings.is_empty() {
        return Err(TrainError::NoSettings);
    }
    let mut log = TrainingLog::default();
    let mut checkpoints = Vec::with_capacity(settings.len());
    for (si, setting) in settings.iter().enumerate() {
        let scaled = setting
            .clone()
            .time_scaled(config.time_scale)
            .map_err(|e| TrainError::Config(e.to_string()))?;
        for ep in 0..config.episodes_per_setting {
            let episode_seed = derive_seed(seed, ((si as u64) << 32) | ep as u64);
            train_episode(&mut learner, &scaled, si, ep, episode_seed, config, &mut log)?;
        }
        let ckpt = learner.checkpoint();
        on_setting(si, &ckpt)?;
        checkpoints.push(ckpt);
    }
    Ok(TrainOutput { scheduler: learner.scheduler, value: learner.value, log, checkpoints })
}
