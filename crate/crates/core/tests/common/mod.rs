//! Shared oracles and generators for the integration tests and the acceptance harness.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdn_dispatch::dispatch::ControllerFeatures;
use sdn_dispatch::ParamStore;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Plausible controller features, spread over the ranges seen in simulation.
pub fn random_features(rng: &mut impl Rng, n: usize) -> Vec<ControllerFeatures> {
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

/// Euclidean projection of `v` onto the probability simplex (sort and threshold).
pub fn simplex_projection(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Brute force over every support of size at most `m`: the closest point of
/// the simplex to the normalised priorities whose support fits in that set.
pub fn brute_force_projection(priorities: &[f64], m: usize) -> Vec<f64> {
    let n = priorities.len();
    let total: f64 = priorities.iter().sum();
    let o: Vec<f64> = priorities.iter().map(|x| x / total).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize > m {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub: Vec<f64> = idx.iter().map(|&i| o[i]).collect();
        let proj = simplex_projection(&sub);
        let mut p = vec![0.0; n];
        for (k, &i) in idx.iter().enumerate() {
            p[i] = proj[k];
        }
        let dist: f64 = p.iter().zip(&o).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, p));
        }
    }
    best.expect("non-empty").1
}

/// Central difference of `f` along parameter `i` of `net`.
pub fn fd_param(net: &ParamStore, i: usize, h: f64, f: impl Fn(&ParamStore) -> f64) -> f64 {
    let mut plus = net.clone();
    plus.params[i] += h;
    let mut minus = net.clone();
    minus.params[i] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}

/// Central difference of `f` along direction `dir` in parameter space.
pub fn fd_direction(net: &ParamStore, dir: &[f64], h: f64, f: impl Fn(&ParamStore) -> f64) -> f64 {
    let mut plus = net.clone();
    let mut minus = net.clone();
    for ((p, m), d) in plus.params.iter_mut().zip(minus.params.iter_mut()).zip(dir) {
        *p += h * d;
        *m -= h * d;
    }
    (f(&plus) - f(&minus)) / (2.0 * h)
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Smallest gap between consecutive sorted values.
pub fn min_gap(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
}
