//! PPO pieces: the piecewise clipped-surrogate gradient, advantage
//! estimation on trajectories, and the effect of one update.

mod common;

use common::{random_features, rng};
use proptest::prelude::*;
use rand::SeedableRng;
use sdn_dispatch::dispatch::{action_probability, action_probability_and_gradient, scheduler_spec, FeatureConfig, GlobalStats};
use sdn_dispatch::ppo::{
    estimate_advantages, surrogate_gradient, train, Advantages, ClipRegion, Learner, TrainingConfig, Trajectory,
    Transition,
};
use sdn_dispatch::{NetworkSetting, ParamStore, SimRng};

fn globals() -> GlobalStats {
    GlobalStats::at_start(&NetworkSetting::preset("env1").unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    /// Zero gradient in both clipped regions and when π(a) = 0; otherwise
    /// exactly `A / π_old` times `∂π/∂θ`.
    #[test]
    fn surrogate_gradient_regions(
        seed in 0u64..10_000,
        n in 2usize..=5,
        m_raw in 1usize..=5,
        ratio in 0.5..1.5f64,
        adv in -3.0..3.0f64,
        pick in 0usize..5,
    ) {
        let cfg = FeatureConfig::default();
        let m = m_raw.min(n);
        let eps = 0.2;
        let net = ParamStore::init(scheduler_spec(), seed);
        let features = random_features(&mut rng(seed), n);
        let action = pick % n;
        let (pi, _) = action_probability(&net, &features, m, action, &cfg).unwrap();
        // The collecting policy had π_old = π / ratio (any positive value when π = 0).
        let prob_old = if pi > 0.0 { (pi / ratio).min(1.0) } else { ratio / 2.0 };
        let t = Transition { features, globals: globals(), action, prob_old, reward: 0.0, value: 0.0 };
        let (g, step) = surrogate_gradient(&t, adv, &net, m, eps, &cfg).unwrap();
        let r = step.ratio;
        let expected_region = if pi == 0.0 {
            ClipRegion::ZeroProbability
        } else if r < 1.0 - eps && adv < 0.0 {
            ClipRegion::ClippedLow
        } else if r > 1.0 + eps && adv > 0.0 {
            ClipRegion::ClippedHigh
        } else {
            ClipRegion::Active
        };
        prop_assert_eq!(step.region, expected_region);
        if expected_region == ClipRegion::Active {
            let dpi = action_probability_and_gradient(&net, &t.features, m, action, &cfg).unwrap().gradient;
            let scale = adv / prob_old;
            let big = dpi.iter().fold(0.0f64, |acc, b| acc.max((scale * b).abs()));
            let mut any_nonzero = false;
            for (a, b) in g.iter().zip(&dpi) {
                prop_assert!((a - scale * b).abs() <= 1e-12 * big.max(1e-300));
                any_nonzero |= *a != 0.0;
            }
            // A single-controller support has π ≡ 1 and a flat surrogate.
            prop_assert!(any_nonzero || m == 1 || adv == 0.0);
        } else {
            prop_assert!(g.iter().all(|&x| x == 0.0));
        }
    }
}

#[test]
fn corrupt_behaviour_probability_is_an_error() {
    let cfg = FeatureConfig::default();
    let net = ParamStore::init(scheduler_spec(), 1);
    let features = random_features(&mut rng(1), 3);
    let t = Transition { features, globals: globals(), action: 0, prob_old: 0.0, reward: 0.0, value: 0.0 };
    assert!(surrogate_gradient(&t, 1.0, &net, 2, 0.2, &cfg).is_err());
}

fn trajectory(rewards: &[f64], values: &[f64], bootstrap: f64, terminal: bool) -> Trajectory {
    let features = random_features(&mut rng(5), 2);
    Trajectory {
        transitions: rewards
            .iter()
            .zip(values)
            .map(|(&reward, &value)| Transition {
                features: features.clone(),
                globals: globals(),
                action: 0,
                prob_old: 0.5,
                reward,
                value,
            })
            .collect(),
        bootstrap_value: bootstrap,
        terminal,
    }
}

#[test]
fn advantages_scale_rewards_and_respect_truncation() {
    let config = TrainingConfig { gamma: 0.5, gae_lambda: 1.0, normalize_advantages: false, ..Default::default() };
    // Rewards of 10⁴/s become 1.0 after scaling.
    let cut = estimate_advantages(&trajectory(&[1e4, 1e4], &[0.0, 0.0], 4.0, false), &config).unwrap();
    // A_1 = 1 + 0.5·4 = 3, A_0 = 1 + 0.5·3 = 2.5.
    assert!((cut.raw[1] - 3.0).abs() < 1e-12 && (cut.raw[0] - 2.5).abs() < 1e-12, "{:?}", cut.raw);
    // At episode end the bootstrap value is ignored.
    let end = estimate_advantages(&trajectory(&[1e4, 1e4], &[0.0, 0.0], 4.0, true), &config).unwrap();
    assert!((end.raw[1] - 1.0).abs() < 1e-12 && (end.raw[0] - 1.5).abs() < 1e-12);
    assert_eq!(end.returns, end.raw);

    let norm = TrainingConfig { normalize_advantages: true, ..config };
    let a = estimate_advantages(&trajectory(&[1e4, 3e4, 0.0], &[0.0; 3], 0.0, true), &norm).unwrap();
    let mean = a.normalized.iter().sum::<f64>() / 3.0;
    assert!(mean.abs() < 1e-12);
}

/// A two-armed bandit: arm 0 is always better. One update has to move
/// probability mass towards it.
#[test]
fn update_moves_probability_towards_positive_advantage() {
    let cfg = FeatureConfig::default();
    let config = TrainingConfig { steps_per_iteration: 64, epochs: 4, minibatch_size: 16, ..Default::default() };
    let mut learner = Learner::new(&config, 3);
    let features = random_features(&mut rng(8), 2);
    let p0 = action_probability(&learner.scheduler, &features, 2, 0, &cfg).unwrap().0;
    let transitions: Vec<Transition> = (0..64)
        .map(|i| {
            let action = i % 2;
            let prob_old = if action == 0 { p0 } else { 1.0 - p0 };
            Transition { features: features.clone(), globals: globals(), action, prob_old, reward: 0.0, value: 0.0 }
        })
        .collect();
    let normalized: Vec<f64> = (0..64).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let adv = Advantages { raw: normalized.clone(), normalized, returns: vec![0.0; 64] };
    let traj = Trajectory { transitions, bootstrap_value: 0.0, terminal: true };
    let stats = learner.update_iteration(&traj, &adv, &config, &mut SimRng::seed_from_u64(0)).unwrap();
    let p1 = action_probability(&learner.scheduler, &features, 2, 0, &cfg).unwrap().0;
    assert!(p1 > p0, "{p0} -> {p1}");
    // The trust region stops the ratio from running far past 1 + ε.
    assert!(p1 / p0 < 1.0 + 2.0 * config.clip_epsilon, "{p0} -> {p1}");
    assert!(stats.active > 0);
}

#[test]
fn update_rejects_empty_trajectory() {
    let config = TrainingConfig::default();
    let mut learner = Learner::new(&config, 1);
    let adv = Advantages { raw: vec![], normalized: vec![], returns: vec![] };
    assert!(learner.update_iteration(&Trajectory::default(), &adv, &config, &mut SimRng::seed_from_u64(0)).is_err());
}

#[test]
fn short_training_run_is_deterministic_and_logged() {
    let settings = [NetworkSetting::preset("env2").unwrap()];
    let config = TrainingConfig {
        time_scale: 0.002,
        steps_per_iteration: 256,
        minibatch_size: 64,
        epochs: 2,
        episodes_per_setting: 1,
        ..Default::default()
    };
    let a = train(&settings, &config, 5).unwrap();
    let b = train(&settings, &config, 5).unwrap();
    assert_eq!(a.log, b.log);
    assert_eq!(a.scheduler.params, b.scheduler.params);
    assert_eq!(a.checkpoints.len(), 1);
    // 0.48 s of 4000 requests/s is about 1900 steps, cut into 256-step iterations.
    let steps: usize = a.log.records.iter().map(|r| r.steps).sum();
    assert!((1700..2200).contains(&steps), "{steps}");
    assert!(a.log.records.iter().all(|r| r.mean_tau > 0.02 && r.cumulative_reward > 0.0));
    let c = train(&settings, &config, 6).unwrap();
    assert_ne!(a.scheduler.params, c.scheduler.params);
    let mut csv = Vec::new();
    a.log.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), a.log.records.len() + 1);
}
