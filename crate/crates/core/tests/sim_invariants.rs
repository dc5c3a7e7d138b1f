//! Simulator invariants: conservation, physical lower bounds, reward
//! bookkeeping and queueing-theory reference values.

mod common;

use proptest::prelude::*;
use rand::Rng;
use sdn_dispatch::baselines::{random_dispatch, WrrState};
use sdn_dispatch::sim::{episode_policy_rng, Step};
use sdn_dispatch::{run_episode, EpisodeOptions, NetworkSetting, RandomPolicy, Simulator, WrrPolicy};

fn setting_strategy() -> impl Strategy<Value = NetworkSetting> {
    (1usize..=4, 1usize..=3).prop_flat_map(|(n_c, n_s)| {
        (
            prop::collection::vec(500.0..5000.0f64, n_c),
            prop::collection::vec(100.0..3000.0f64, n_s),
            prop::collection::vec(prop::collection::vec(0.0..0.03f64, n_c), n_s),
        )
            .prop_map(|(caps, rates, delay)| {
                NetworkSetting::new(caps, rates, delay).unwrap().with_t_max(0.4).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn requests_are_conserved_and_rewards_add_up(setting in setting_strategy(), seed in 0u64..1000) {
        let mut sim = Simulator::new(&setting, seed);
        sim.record_responses();
        let mut rng = episode_policy_rng(seed);
        let mut reward_total = 0.0;
        loop {
            let step = sim.advance_to_next_request().unwrap();
            prop_assert!(sim.counts().conserved());
            match step {
                Step::Request { reward, .. } => {
                    reward_total += reward;
                    sim.dispatch_request(random_dispatch(setting.num_controllers(), &mut rng)).unwrap();
                    prop_assert!(sim.counts().conserved());
                }
                Step::End { reward } => {
                    reward_total += reward;
                    break;
                }
            }
        }
        let c = sim.counts();
        prop_assert!(c.conserved());
        prop_assert_eq!(c.awaiting_dispatch, 0);
        prop_assert!(c.delivered <= c.generated);

        let from_log: f64 = sim.responses().iter().map(|r| 1.0 / r.tau).sum();
        prop_assert!((reward_total - from_log).abs() <= 1e-9 * from_log.max(1.0));
        prop_assert!((reward_total - sim.stats().sum_inv_tau).abs() <= 1e-9 * from_log.max(1.0));

        // τ can never beat both propagation legs plus one service time.
        for r in sim.responses() {
            let (s, c) = (r.request.switch, r.request.controller);
            let floor = 2.0 * setting.delay[s][c] + 1.0 / setting.capacities[c];
            prop_assert!(r.tau >= floor - 1e-12, "tau {} < floor {}", r.tau, floor);
            prop_assert!(r.delivered_at <= setting.t_max);
        }
    }

    #[test]
    fn distribution_rows_match_generated_requests(setting in setting_strategy(), seed in 0u64..1000) {
        let log = run_episode(&setting, &mut WrrPolicy::default(), seed, EpisodeOptions::default()).unwrap();
        for (s, row) in log.distribution.iter().enumerate() {
            let generated = log.steps.iter().filter(|r| r.switch == s).count() as u64;
            prop_assert_eq!(row.iter().sum::<u64>(), generated);
        }
        prop_assert_eq!(log.steps.len() as u64, log.generated);
        prop_assert!(log.throughput <= log.generated as f64 / log.t_max + 1e-9);
    }
}

/// Single FIFO controller at ρ = 5/9 with no propagation delay: the mean
/// wait must match the Pollaczek–Khinchine value for deterministic service.
#[test]
fn md1_mean_wait() {
    let (lambda, alpha) = (5000.0, 9000.0);
    let setting = NetworkSetting::new(vec![alpha], vec![lambda], vec![vec![0.0]]).unwrap().with_t_max(60.0).unwrap();
    let log = run_episode(&setting, &mut RandomPolicy, 5, EpisodeOptions { record_steps: false }).unwrap();
    let rho = lambda / alpha;
    let expected = rho / (2.0 * alpha * (1.0 - rho));
    let got = log.mean_wait[0];
    assert!((got - expected).abs() / expected < 0.05, "wait {got} vs {expected}");
    // With zero delay, τ is wait plus service.
    assert!((log.mean_response_time - (got + 1.0 / alpha)).abs() < 2e-6);
    // Little's law on the controller: L = λ (W + S).
    let l = lambda * (expected + 1.0 / alpha);
    assert!((log.mean_queue_len[0] - l).abs() / l < 0.05, "L {} vs {l}", log.mean_queue_len[0]);
}

#[test]
fn overloaded_controller_queue_grows_without_bound() {
    let setting = NetworkSetting::new(vec![1000.0], vec![1100.0], vec![vec![0.001]]).unwrap();
    let short = setting.clone().with_t_max(5.0).unwrap();
    let long = setting.with_t_max(20.0).unwrap();
    let opts = EpisodeOptions { record_steps: false };
    let a = run_episode(&short, &mut RandomPolicy, 1, opts).unwrap();
    let b = run_episode(&long, &mut RandomPolicy, 1, opts).unwrap();
    // Backlog grows at ~100 requests/s, so waits grow roughly linearly in t_max.
    assert!(b.mean_response_time > 3.0 * a.mean_response_time);
    assert!(b.throughput < 1000.0 + 1.0);
}

#[test]
fn stable_setting_has_bounded_response_time() {
    let setting = NetworkSetting::preset("env2").unwrap().with_t_max(20.0).unwrap();
    let opts = EpisodeOptions { record_steps: false };
    let log = run_episode(&setting, &mut WrrPolicy::default(), 3, opts).unwrap();
    // 2 × 10 ms propagation plus small queueing at moderate load.
    assert!(log.mean_response_time > 0.02 && log.mean_response_time < 0.0205, "{}", log.mean_response_time);
    assert!((log.throughput - 4000.0).abs() < 100.0);
}

#[test]
fn random_dispatch_splits_evenly() {
    // Three controllers sharing 20000 requests/s get about 6666.7 each.
    let setting = NetworkSetting::new(vec![30_000.0; 3], vec![5000.0; 4], vec![vec![0.001; 3]; 4])
        .unwrap()
        .with_t_max(10.0)
        .unwrap();
    let log = run_episode(&setting, &mut RandomPolicy, 9, EpisodeOptions { record_steps: false }).unwrap();
    for c in 0..3 {
        let per_sec: f64 = log.distribution.iter().map(|r| r[c]).sum::<u64>() as f64 / 10.0;
        assert!((per_sec - 20_000.0 / 3.0).abs() < 100.0, "controller {c}: {per_sec}");
    }
}

#[test]
fn random_dispatch_frequencies_and_independence() {
    let mut r = common::rng(11);
    let n = 100_000;
    let draws: Vec<usize> = (0..n).map(|_| random_dispatch(4, &mut r)).collect();
    let mut freq = [0usize; 4];
    let mut pairs = [[0usize; 4]; 4];
    for (i, &d) in draws.iter().enumerate() {
        freq[d] += 1;
        if i > 0 {
            pairs[draws[i - 1]][d] += 1;
        }
    }
    for f in freq {
        assert!((f as f64 / n as f64 - 0.25).abs() < 0.01);
    }
    // Lag-1 pair counts against independence: 15 degrees of freedom, 0.1% critical value 37.7.
    let expected = (n - 1) as f64 / 16.0;
    let chi2: f64 = pairs.iter().flatten().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < 37.7, "chi2 {chi2}");
    assert_eq!(random_dispatch(1, &mut r), 0);
}

#[test]
fn wrr_long_run_fractions_match_capacities() {
    let mut r = common::rng(12);
    for _ in 0..10 {
        let n = r.random_range(1..=6);
        let caps: Vec<f64> = (0..n).map(|_| r.random_range(1000.0..20_000.0f64).round()).collect();
        let mut state = WrrState::new(&caps);
        let mut counts = vec![0usize; n];
        for _ in 0..100_000 {
            counts[state.select()] += 1;
        }
        let total: f64 = caps.iter().sum();
        for (c, &k) in counts.iter().enumerate() {
            let want = caps[c] / total;
            assert!((k as f64 / 1e5 - want).abs() <= 0.01 * want, "{caps:?}: {counts:?}");
        }
    }
}

#[test]
fn wrr_exact_cycles() {
    let count = |caps: &[f64], k: usize| {
        let mut s = WrrState::new(caps);
        let mut c = vec![0; caps.len()];
        for _ in 0..k {
            c[s.select()] += 1;
        }
        (c, s.credits().iter().sum::<f64>())
    };
    assert_eq!(count(&[15000.0, 6000.0], 7).0, vec![5, 2]);
    assert_eq!(count(&[6000.0, 9000.0, 12000.0], 9).0, vec![2, 3, 4]);
    let (c, credit_sum) = count(&[6000.0, 9000.0, 12000.0], 9000);
    assert_eq!(c, vec![2000, 3000, 4000]);
    assert!(credit_sum.abs() < 1e-6);
}
