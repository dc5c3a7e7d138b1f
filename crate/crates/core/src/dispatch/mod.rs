//! The dispatching system: state extraction, the scheduling function that
//! scores each controller, top-m projection and sampling.

pub mod features;
pub mod projection;
pub mod scheduler;

pub use features::{
    extract_all, extract_features, ControllerFeatures, FeatureConfig, GlobalStats, SwitchView, FEATURE_DIM,
    GLOBAL_DIM, HISTORY_LEN,
};
pub use projection::{project, sample_action, DispatchDistribution};
pub use scheduler::{
    action_probability, action_probability_and_gradient, compute_priorities, scheduler_spec, ActionGradient,
    DEFAULT_M,
};

use crate::error::DispatchError;
use crate::nn::ParamStore;
use crate::policy::{DispatchContext, DispatchPolicy, SimRng};

/// A trained (or training) scheduling function used as a dispatch policy.
/// One instance can serve every switch: it keeps no per-switch state.
#[derive(Debug, Clone)]
pub struct LearnedPolicy {
    pub net: ParamStore,
    pub m: usize,
    pub features: FeatureConfig,
    label: String,
}

impl LearnedPolicy {
    pub fn new(net: ParamStore, m: usize) -> Self {
        Self { net, m, features: FeatureConfig::default(), label: String::from("proposed") }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn distribution(&self, ctx: &DispatchContext<'_>) -> Result<DispatchDistribution, DispatchError> {
        let feats = extract_all(ctx.view, ctx.setting, ctx.switch, ctx.now, &self.features);
        project(&compute_priorities(&self.net, &feats, &self.features)?, self.m)
    }
}

impl DispatchPolicy for LearnedPolicy {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn select(&mut self, ctx: &DispatchContext<'_>, rng: &mut SimRng) -> Result<usize, DispatchError> {
        Ok(sample_action(&self.distribution(ctx)?, rng))
    }
}
