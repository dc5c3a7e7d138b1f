use crate::dispatch::features::{ControllerFeatures, FeatureConfig, FEATURE_DIM};
use crate::dispatch::projection::{project, DispatchDistribution};
use crate::error::{DispatchError, NnError};
use crate::nn::{MlpSpec, OutputHead, ParamStore};

/// Support size used throughout the experiments.
pub const DEFAULT_M: usize = 2;

pub fn scheduler_spec() -> MlpSpec {
    MlpSpec::new(FEATURE_DIM, OutputHead::Softplus)
}

/// Scores every controller independently with the same network.
pub fn compute_priorities(
    net: &ParamStore,
    features: &[ControllerFeatures],
    cfg: &FeatureConfig,
) -> Result<Vec<f64>, DispatchError> {
    features
        .iter()
        .map(|f| {
            if let Some(i) = f.0.iter().position(|x| !x.is_finite()) {
                return Err(DispatchError::Network(NnError::NonFiniteInput(i)));
            }
            Ok(net.forward(&f.to_input(cfg))?)
        })
        .collect()
}

/// `π(action | s)` together with its gradient with respect to the network parameters.
#[derive(Debug, Clone)]
pub struct ActionGradient {
    pub probability: f64,
    pub gradient: Vec<f64>,
    pub distribution: DispatchDistribution,
}

/// Derivative of `p_action` with respect to each priority, with the rank
/// order held fixed. With `T = Σ o`, `R = Σ_{rank > m} o` and `π = (o_a + R/m) / T`:
///
/// ```text
/// ∂π/∂o_c = ([c = a] + [rank(c) > m] / m - π) / T
/// ```
///
/// Returns zeros when `action` is outside the support.
pub fn probability_sensitivities(dist: &DispatchDistribution, action: usize) -> Vec<f64> {
    let n = dist.num_controllers();
    let mut coeffs = vec![0.0; n];
    if !dist.in_support(action) {
        return coeffs;
    }
    let total: f64 = dist.priorities.iter().sum();
    let pi = dist.probabilities[action];
    let spill = 1.0 / dist.m as f64;
    for (rank, &c) in dist.permutation.iter().enumerate() {
        let mut num = -pi;
        if c == action {
            num += 1.0;
        }
        if rank >= dist.m {
            num += spill;
        }
        coeffs[c] = num / total;
    }
    coeffs
}

/// `π(action | s)` without the gradient.
pub fn action_probability(
    net: &ParamStore,
    features: &[ControllerFeatures],
    m: usize,
    action: usize,
    cfg: &FeatureConfig,
) -> Result<(f64, DispatchDistribution), DispatchError> {
    if action >= features.len() {
        return Err(DispatchError::ActionOutOfRange { action, controllers: features.len() });
    }
    let dist = project(&compute_priorities(net, features, cfg)?, m)?;
    Ok((dist.probabilities[action], dist))
}

/// `π(action | s)` and `∂π/∂θ` through the network, the normalisation and the
/// top-m correction. The sort permutation is treated as locally constant.
pub fn action_probability_and_gradient(
    net: &ParamStore,
    features: &[ControllerFeatures],
    m: usize,
    action: usize,
    cfg: &FeatureConfig,
) -> Result<ActionGradient, DispatchError> {
    let (probability, distribution) = action_probability(net, features, m, action, cfg)?;
    let mut gradient = vec![0.0; net.len()];
    accumulate_probability_gradient(net, features, &distribution, action, 1.0, cfg, &mut gradient)?;
    Ok(ActionGradient { probability, gradient, distribution })
}

/// Adds `scale * ∂π(action)/∂θ` into `out`, reusing an already projected distribution.
pub fn accumulate_probability_gradient(
    net: &ParamStore,
    features: &[ControllerFeatures],
    dist: &DispatchDistribution,
    action: usize,
    scale: f64,
    cfg: &FeatureConfig,
    out: &mut [f64],
) -> Result<(), DispatchError> {
    let coeffs = probability_sensitivities(dist, action);
    for (f, &w) in features.iter().zip(&coeffs) {
        if w != 0.0 {
            net.backward_into(&f.to_input(cfg), scale * w, out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_features(rng: &mut ChaCha8Rng, n: usize) -> Vec<ControllerFeatures> {
        (0..n)
            .map(|_| {
                ControllerFeatures([
                    rng.random_range(0.3..1.0),
                    rng.random_range(0.001..0.05),
                    rng.random_range(0.0..1.0),
                    rng.random_range(-0.2..0.2),
                    rng.random_range(0.002..0.1),
                    rng.random_range(-0.01..0.01),
                    rng.random_range(0.0..8000.0),
                ])
            })
            .collect()
    }

    #[test]
    fn zero_network_gives_ln2() {
        let net = ParamStore::zeros(scheduler_spec());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let o = compute_priorities(&net, &random_features(&mut rng, 3), &FeatureConfig::default()).unwrap();
        assert!(o.iter().all(|x| (x - std::f64::consts::LN_2).abs() < 1e-15));
    }

    #[test]
    fn priorities_follow_controller_permutation() {
        let cfg = FeatureConfig::default();
        let net = ParamStore::init(scheduler_spec(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let feats = random_features(&mut rng, 4);
        let o = compute_priorities(&net, &feats, &cfg).unwrap();
        let perm = [2, 0, 3, 1];
        let permuted: Vec<_> = perm.iter().map(|&i| feats[i]).collect();
        let o2 = compute_priorities(&net, &permuted, &cfg).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(o2[k], o[i]);
        }
    }

    #[test]
    fn same_parameters_serve_any_controller_count() {
        let cfg = FeatureConfig::default();
        let net = ParamStore::init(scheduler_spec(), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [1, 2, 3, 4, 8] {
            let feats = random_features(&mut rng, n);
            let o = compute_priorities(&net, &feats, &cfg).unwrap();
            assert_eq!(o.len(), n);
            assert!(o.iter().all(|&x| x > 0.0));
            let d = project(&o, DEFAULT_M).unwrap();
            assert!((d.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_feature_rejected() {
        let net = ParamStore::zeros(scheduler_spec());
        let mut f = ControllerFeatures([0.0; FEATURE_DIM]);
        f.0[4] = f64::INFINITY;
        assert_eq!(
            compute_priorities(&net, &[f], &FeatureConfig::default()),
            Err(DispatchError::Network(NnError::NonFiniteInput(4)))
        );
    }

    #[test]
    fn single_controller_gradient_is_zero() {
        let cfg = FeatureConfig::default();
        let net = ParamStore::init(scheduler_spec(), 8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = action_probability_and_gradient(&net, &random_features(&mut rng, 1), 1, 0, &cfg).unwrap();
        assert_eq!(g.probability, 1.0);
        assert!(g.gradient.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn out_of_support_gradient_is_zero() {
        let cfg = FeatureConfig::default();
        let net = ParamStore::init(scheduler_spec(), 9);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let feats = random_features(&mut rng, 3);
        let (_, d) = action_probability(&net, &feats, 2, 0, &cfg).unwrap();
        let outside = d.permutation[2];
        let g = action_probability_and_gradient(&net, &feats, 2, outside, &cfg).unwrap();
        assert_eq!(g.probability, 0.0);
        assert!(g.gradient.iter().all(|&x| x == 0.0));
        assert!(action_probability(&net, &feats, 2, 3, &cfg).is_err());
    }

    /// Three controllers, m = 2, priorities already in rank order: the
    /// sensitivities must reproduce the hand-derived expression with the
    /// `0.5 * o3` correction.
    #[test]
    fn three_controller_closed_form() {
        let o = [0.9, 0.6, 0.3];
        let dist = project(&o, 2).unwrap();
        let t: f64 = o.iter().sum();
        for i in 0..2 {
            let s = probability_sensitivities(&dist, i);
            let num = o[i] + 0.5 * o[2];
            let expected: Vec<f64> = (0..3)
                .map(|c| {
                    let direct = if c == i { 1.0 } else { 0.0 } + if c == 2 { 0.5 } else { 0.0 };
                    direct / t - num / (t * t)
                })
                .collect();
            for (a, b) in s.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-14, "{s:?} vs {expected:?}");
            }
        }
    }

    #[test]
    fn support_gradients_sum_to_zero() {
        let cfg = FeatureConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for seed in 0..5 {
            let net = ParamStore::init(scheduler_spec(), seed);
            let n = 2 + seed as usize;
            let feats = random_features(&mut rng, n);
            let (_, d) = action_probability(&net, &feats, 3, 0, &cfg).unwrap();
            let mut total = vec![0.0; net.len()];
            let mut scale = 0.0f64;
            for &a in d.support() {
                let g = action_probability_and_gradient(&net, &feats, 3, a, &cfg).unwrap();
                for (t, x) in total.iter_mut().zip(&g.gradient) {
                    *t += x;
                    scale = scale.max(x.abs());
                }
            }
            assert!(total.iter().all(|t| t.abs() <= 1e-12 * scale.max(1.0)));
        }
    }
}
