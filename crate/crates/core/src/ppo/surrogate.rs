//! Clipped-surrogate policy gradient and the value-regression gradient.

use crate::dispatch::features::{ControllerFeatures, FeatureConfig, GlobalStats};
use crate::dispatch::scheduler::{accumulate_probability_gradient, action_probability};
use crate::error::TrainError;
use crate::nn::ParamStore;

/// One dispatch decision collected during a rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub features: Vec<ControllerFeatures>,
    pub globals: GlobalStats,
    pub action: usize,
    /// Probability of `action` under the policy that collected it.
    pub prob_old: f64,
    /// Reward collected after this decision, 1/s.
    pub reward: f64,
    /// Value estimate of `globals` at collection time (scaled reward units).
    pub value: f64,
}

/// Which branch of the piecewise surrogate gradient applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClipRegion {
    /// Gradient `(A / π_old) ∂π/∂θ`.
    Active,
    /// `r < 1 - ε` with `A < 0`: zero gradient.
    ClippedLow,
    /// `r > 1 + ε` with `A > 0`: zero gradient.
    ClippedHigh,
    /// The action fell outside the top-m support: `π = 0`, zero gradient.
    ZeroProbability,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateStep {
    pub region: ClipRegion,
    pub ratio: f64,
    pub probability: f64,
}

fn check_prob_old(t: &Transition) -> Result<(), TrainError> {
    if t.prob_old > 0.0 && t.prob_old.is_finite() {
        Ok(())
    } else {
        Err(TrainError::CorruptProbability(t.prob_old))
    }
}

fn region(ratio: f64, probability: f64, advantage: f64, eps: f64) -> ClipRegion {
    if probability == 0.0 {
        ClipRegion::ZeroProbability
    } else if ratio < 1.0 - eps && advantage < 0.0 {
        ClipRegion::ClippedLow
    } else if ratio > 1.0 + eps && advantage > 0.0 {
        ClipRegion::ClippedHigh
    } else {
        ClipRegion::Active
    }
}

/// Adds `∂C/∂θ` for one transition into `out`.
pub fn surrogate_gradient_into(
    t: &Transition,
    advantage: f64,
    net: &ParamStore,
    m: usize,
    clip_epsilon: f64,
    features: &FeatureConfig,
    out: &mut [f64],
) -> Result<SurrogateStep, TrainError> {
    check_prob_old(t)?;
    let (probability, dist) = action_probability(net, &t.features, m, t.action, features)?;
    let ratio = probability / t.prob_old;
    let region = region(ratio, probability, advantage, clip_epsilon);
    if region == ClipRegion::Active && advantage != 0.0 {
        let scale = advantage / t.prob_old;
        accumulate_probability_gradient(net, &t.features, &dist, t.action, scale, features, out)?;
    }
    Ok(SurrogateStep { region, ratio, probability })
}

/// `∂C/∂θ` for one transition as a fresh vector.
pub fn surrogate_gradient(
    t: &Transition,
    advantage: f64,
    net: &ParamStore,
    m: usize,
    clip_epsilon: f64,
    features: &FeatureConfig,
) -> Result<(Vec<f64>, SurrogateStep), TrainError> {
    let mut out = vec![0.0; net.len()];
    let step = surrogate_gradient_into(t, advantage, net, m, clip_epsilon, features, &mut out)?;
    Ok((out, step))
}

/// `min(r A, clip(r, 1-ε, 1+ε) A)` for one transition.
pub fn surrogate_objective(
    t: &Transition,
    advantage: f64,
    net: &ParamStore,
    m: usize,
    clip_epsilon: f64,
    features: &FeatureConfig,
) -> Result<f64, TrainError> {
    check_prob_old(t)?;
    let (probability, _) = action_probability(net, &t.features, m, t.action, features)?;
    let r = probability / t.prob_old;
    let clipped = r.clamp(1.0 - clip_epsilon, 1.0 + clip_epsilon);
    Ok((r * advantage).min(clipped * advantage))
}

/// Adds the gradient of `½ (V(s') - target)²` into `out`; returns `V(s')`.
pub fn value_gradient_into(
    globals: &GlobalStats,
    target: f64,
    net: &ParamStore,
    out: &mut [f64],
) -> Result<f64, TrainError> {
    let x = globals.to_input();
    let v = net.forward(&x).map_err(crate::error::DispatchError::from)?;
    net.backward_into(&x, v - target, out).map_err(crate::error::DispatchError::from)?;
    Ok(v)
}

pub fn value_gradient(globals: &GlobalStats, target: f64, net: &ParamStore) -> Result<Vec<f64>, TrainError> {
    let mut out = vec![0.0; net.len()];
    value_gradient_into(globals, target, net, &mut out)?;
    Ok(out)
}
