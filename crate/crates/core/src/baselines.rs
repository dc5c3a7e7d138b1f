//! Heuristic dispatchers used for comparison: uniform random and smooth
//! capacity-weighted round-robin.

use rand::Rng;

use crate::error::DispatchError;
use crate::policy::{DispatchContext, DispatchPolicy, SimRng};
use crate::setting::NetworkSetting;

pub fn random_dispatch<R: Rng + ?Sized>(num_controllers: usize, rng: &mut R) -> usize {
    assert!(num_controllers >= 1, "need at least one controller");
    rng.random_range(0..num_controllers)
}

/// Smooth weighted round-robin over controller capacities.
///
/// Every pick adds each controller's weight to its credit, selects the
/// largest credit (lowest index on ties) and charges the winner the total
/// weight. Capacities are used as weights directly so integral capacities
/// give exact cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct WrrState {
    weights: Vec<f64>,
    credits: Vec<f64>,
    total: f64,
}

impl WrrState {
    pub fn new(capacities: &[f64]) -> Self {
        assert!(!capacities.is_empty(), "need at least one controller");
        Self {
            weights: capacities.to_vec(),
            credits: vec![0.0; capacities.len()],
            total: capacities.iter().sum(),
        }
    }

    /// `α_c / Σα`.
    pub fn weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total).collect()
    }

    pub fn credits(&self) -> &[f64] {
        &self.credits
    }

    pub fn select(&mut self) -> usize {
        for (c, w) in self.credits.iter_mut().zip(&self.weights) {
            *c += w;
        }
        let mut best = 0;
        for i in 1..self.credits.len() {
            if self.credits[i] > self.credits[best] {
                best = i;
            }
        }
        self.credits[best] -= self.total;
        best
    }
}

pub fn wrr_dispatch(state: &mut WrrState) -> usize {
    state.select()
}

#[derive(Debug, Clone, Default)]
pub struct RandomPolicy;

impl DispatchPolicy for RandomPolicy {
    fn name(&self) -> String {
        "rand".into()
    }

    fn select(&mut self, ctx: &DispatchContext<'_>, rng: &mut SimRng) -> Result<usize, DispatchError> {
        Ok(random_dispatch(ctx.setting.num_controllers(), rng))
    }
}

/// Weighted round-robin with independent state per switch.
#[derive(Debug, Clone, Default)]
pub struct WrrPolicy {
    per_switch: Vec<WrrState>,
}

impl DispatchPolicy for WrrPolicy {
    fn name(&self) -> String {
        "wrr".into()
    }

    fn reset(&mut self, setting: &NetworkSetting) {
        self.per_switch = vec![WrrState::new(&setting.capacities); setting.num_switches()];
    }

    fn select(&mut self, ctx: &DispatchContext<'_>, _rng: &mut SimRng) -> Result<usize, DispatchError> {
        if self.per_switch.len() != ctx.setting.num_switches() {
            self.reset(ctx.setting);
        }
        Ok(self.per_switch[ctx.switch].select())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn counts(caps: &[f64], n: usize) -> Vec<usize> {
        let mut st = WrrState::new(caps);
        let mut c = vec![0; caps.len()];
        for _ in 0..n {
            c[wrr_dispatch(&mut st)] += 1;
        }
        c
    }

    #[test]
    fn wrr_cycles() {
        assert_eq!(counts(&[15000.0, 6000.0], 7), vec![5, 2]);
        assert_eq!(counts(&[6000.0, 9000.0, 12000.0], 9), vec![2, 3, 4]);
    }

    #[test]
    fn wrr_equal_weights_alternate() {
        let mut st = WrrState::new(&[9000.0, 9000.0]);
        let picks: Vec<usize> = (0..6).map(|_| st.select()).collect();
        assert_eq!(picks, vec![0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn wrr_interleaves_and_credits_return_to_zero() {
        let mut st = WrrState::new(&[15000.0, 6000.0]);
        let picks: Vec<usize> = (0..7).map(|_| st.select()).collect();
        // Smooth: the light controller is not served twice in a row, nor bunched at the end.
        assert_eq!(picks, vec![0, 1, 0, 0, 0, 1, 0]);
        assert!(st.credits().iter().all(|&c| c == 0.0));
        assert_eq!(st.weights(), vec![15.0 / 21.0, 6.0 / 21.0]);
    }

    #[test]
    fn random_single_controller() {
        let mut rng = SimRng::seed_from_u64(0);
        assert!((0..100).all(|_| random_dispatch(1, &mut rng) == 0));
    }

    #[test]
    fn random_frequencies_uniform() {
        let mut rng = SimRng::seed_from_u64(1);
        let mut c = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            c[random_dispatch(4, &mut rng)] += 1;
        }
        assert!(c.iter().all(|&k| (k as f64 / n as f64 - 0.25).abs() < 0.01), "{c:?}");
    }
}
