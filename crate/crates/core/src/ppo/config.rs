use crate::dispatch::{FeatureConfig, DEFAULT_M};
use crate::error::TrainError;

/// PPO hyper-parameters. Defaults follow the usual MuJoCo PPO setting.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    /// Simulation steps (dispatched requests) per learning iteration.
    pub steps_per_iteration: usize,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub clip_epsilon: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub policy_lr: f64,
    pub value_lr: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub episodes_per_setting: usize,
    /// Support size of the top-m projection.
    pub m: usize,
    /// Rewards (1/s) are multiplied by this before advantage and value-target
    /// computation, keeping value targets near unit scale.
    pub reward_scale: f64,
    pub normalize_advantages: bool,
    /// Applied to every training setting (see [`NetworkSetting::time_scaled`](crate::setting::NetworkSetting::time_scaled)).
    pub time_scale: f64,
    pub features: FeatureConfig,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            steps_per_iteration: 1024,
            epochs: 10,
            minibatch_size: 64,
            clip_epsilon: 0.2,
            gamma: 0.99,
            gae_lambda: 0.95,
            policy_lr: 3e-4,
            value_lr: 3e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            episodes_per_setting: 2,
            m: DEFAULT_M,
            reward_scale: 1e-4,
            normalize_advantages: true,
            time_scale: 1.0,
            features: FeatureConfig::default(),
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: &str| Err(TrainError::Config(msg.to_string()));
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return bad("clip epsilon must lie in (0, 1)");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("GAE lambda must lie in [0, 1]");
        }
        if self.steps_per_iteration == 0 || self.minibatch_size == 0 || self.epochs == 0 {
            return bad("iteration length, minibatch size and epochs must be positive");
        }
        if !self.steps_per_iteration.is_multiple_of(self.minibatch_size) {
            return bad("steps per iteration must divide into whole minibatches");
        }
        if self.m == 0 {
            return bad("support size m must be at least 1");
        }
        if self.episodes_per_setting == 0 {
            return bad("at least one episode per setting is required");
        }
        if !(self.policy_lr > 0.0 && self.value_lr > 0.0 && self.reward_scale > 0.0 && self.time_scale > 0.0) {
            return bad("step sizes, reward scale and time scale must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = TrainingConfig::default();
        c.validate().unwrap();
        assert_eq!((c.steps_per_iteration, c.epochs, c.minibatch_size), (1024, 10, 64));
        assert_eq!(c.clip_epsilon, 0.2);
        assert_eq!(c.episodes_per_setting, 2);
        assert_eq!(c.m, 2);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = TrainingConfig { clip_epsilon: 1.0, ..Default::default() };
        assert!(c.validate().is_err());
        c.clip_epsilon = 0.2;
        c.gamma = 0.0;
        assert!(c.validate().is_err());
        c.gamma = 0.99;
        c.minibatch_size = 100;
        assert!(c.validate().is_err());
    }
}
