//! Top-m probability projection.
//!
//! Priorities are normalised to sum to one and ranked in descending order.
//! The `m` best-ranked controllers share the leftover mass equally and every
//! other controller gets probability zero:
//!
//! ```text
//! p_(i) = õ_(i) + (1 - Σ_{j<=m} õ_(j)) / m    for ranks i <= m
//! p_(i) = 0                                   otherwise
//! ```
//!
//! The correction is never negative, so this is the Euclidean projection of
//! the normalised priorities onto the simplex restricted to the top-m ranks.

use rand::Rng;

use crate::error::DispatchError;

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchDistribution {
    /// Raw priorities, controller order.
    pub priorities: Vec<f64>,
    /// Normalised priorities in rank order (descending).
    pub normalized_sorted: Vec<f64>,
    /// `permutation[rank] = controller`. Ties go to the lower controller index.
    pub permutation: Vec<usize>,
    /// Dispatch probabilities, controller order.
    pub probabilities: Vec<f64>,
    /// Effective support size, `min(m, N_c)`.
    pub m: usize,
}

impl DispatchDistribution {
    pub fn num_controllers(&self) -> usize {
        self.priorities.len()
    }

    pub fn rank_of(&self, controller: usize) -> Option<usize> {
        self.permutation.iter().position(|&c| c == controller)
    }

    /// Controllers with non-zero probability, best rank first.
    pub fn support(&self) -> &[usize] {
        &self.permutation[..self.m]
    }

    pub fn in_support(&self, controller: usize) -> bool {
        self.support().contains(&controller)
    }
}

/// Stable descending rank order of `values`.
pub fn rank_order(values: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..values.len()).collect();
    perm.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    perm
}

/// Projects a priority vector onto the top-`m` simplex. `m` larger than the
/// number of controllers is clamped.
pub fn project(priorities: &[f64], m: usize) -> Result<DispatchDistribution, DispatchError> {
    if priorities.is_empty() {
        return Err(DispatchError::NoControllers);
    }
    if m == 0 {
        return Err(DispatchError::ZeroSupport);
    }
    if let Some((index, &value)) = priorities
        .iter()
        .enumerate()
        .find(|(_, o)| !(o.is_finite() && **o >= 0.0))
    {
        return Err(DispatchError::InvalidPriority { index, value });
    }
    let total: f64 = priorities.iter().sum();
    if total <= 0.0 {
        return Err(DispatchError::InvalidPriority { index: 0, value: 0.0 });
    }

    let n = priorities.len();
    let m = m.min(n);
    let permutation = rank_order(priorities);
    let normalized_sorted: Vec<f64> = permutation.iter().map(|&c| priorities[c] / total).collect();
    let top: f64 = normalized_sorted[..m].iter().sum();
    let correction = (1.0 - top) / m as f64;

    let mut probabilities = vec![0.0; n];
    for (rank, &c) in permutation.iter().take(m).enumerate() {
        probabilities[c] = normalized_sorted[rank] + correction;
    }
    Ok(DispatchDistribution {
        priorities: priorities.to_vec(),
        normalized_sorted,
        permutation,
        probabilities,
        m,
    })
}

/// Draws a controller. Only the support is walked, so zero-probability
/// controllers are never returned.
pub fn sample_action<R: Rng + ?Sized>(dist: &DispatchDistribution, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for &c in dist.support() {
        cum += dist.probabilities[c];
        if u < cum {
            return c;
        }
    }
    // Rounding left `cum` a hair below `u`.
    dist.support()[dist.m - 1]
}
