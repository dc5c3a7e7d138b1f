//! State extraction: what one switch knows about each controller, and the
//! network-wide statistics fed to the value function.

use std::collections::VecDeque;

use crate::setting::NetworkSetting;

pub const FEATURE_DIM: usize = 7;

/// Number of past report windows kept in [`GlobalStats`].
pub const HISTORY_LEN: usize = 5;

pub const GLOBAL_DIM: usize = 3 + 2 * HISTORY_LEN;

/// Input scaling applied before the scheduling network: delays and response
/// times in units of 10 ms, the switch rate relative to `alpha_ref`.
const FEATURE_INPUT_SCALE: [f64; FEATURE_DIM] = [1.0, 100.0, 1.0, 1.0, 100.0, 100.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    /// Capacity used to normalise `capacity_norm` and the switch rate.
    pub alpha_ref: f64,
    /// Weight of the newest sample in the response-time EWMA.
    pub ewma_weight: f64,
    /// Sliding window for the switch arrival-rate estimate, unscaled seconds.
    pub rate_window: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { alpha_ref: 15000.0, ewma_weight: 0.1, rate_window: 0.1 }
    }
}

/// Per-controller state as seen from one switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerFeatures(pub [f64; FEATURE_DIM]);

impl ControllerFeatures {
    pub fn capacity_norm(&self) -> f64 {
        self.0[0]
    }
    pub fn delay(&self) -> f64 {
        self.0[1]
    }
    pub fn reported_u(&self) -> f64 {
        self.0[2]
    }
    pub fn u_delta(&self) -> f64 {
        self.0[3]
    }
    pub fn tau_ewma(&self) -> f64 {
        self.0[4]
    }
    pub fn tau_delta(&self) -> f64 {
        self.0[5]
    }
    pub fn switch_rate_est(&self) -> f64 {
        self.0[6]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Network input encoding.
    pub fn to_input(&self, cfg: &FeatureConfig) -> [f64; FEATURE_DIM] {
        let mut x = self.0;
        for (v, s) in x.iter_mut().zip(FEATURE_INPUT_SCALE) {
            *v *= s;
        }
        x[6] /= cfg.alpha_ref;
        x
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct PairHistory {
    u_last: f64,
    u_prev: f64,
    tau_ewma: f64,
    tau_delta: f64,
    responses: u64,
}

/// Everything a switch has observed: delayed utilization reports, response
/// times per controller, and its own recent generation times.
#[derive(Debug, Clone)]
pub struct SwitchView {
    pairs: Vec<PairHistory>,
    generations: VecDeque<f64>,
    rate_window: f64,
    ewma_weight: f64,
}

impl SwitchView {
    pub fn new(num_controllers: usize, cfg: &FeatureConfig, time_scale: f64) -> Self {
        Self {
            pairs: vec![PairHistory::default(); num_controllers],
            generations: VecDeque::new(),
            rate_window: cfg.rate_window * time_scale,
            ewma_weight: cfg.ewma_weight,
        }
    }

    pub fn num_controllers(&self) -> usize {
        self.pairs.len()
    }

    pub fn record_report(&mut self, controller: usize, u: f64) {
        let p = &mut self.pairs[controller];
        p.u_prev = p.u_last;
        p.u_last = u;
    }

    /// The first response seeds the EWMA.
    pub fn record_response(&mut self, controller: usize, tau: f64) {
        let w = self.ewma_weight;
        let p = &mut self.pairs[controller];
        if p.responses == 0 {
            p.tau_ewma = tau;
            p.tau_delta = 0.0;
        } else {
            let next = (1.0 - w) * p.tau_ewma + w * tau;
            p.tau_delta = next - p.tau_ewma;
            p.tau_ewma = next;
        }
        p.responses += 1;
    }

    pub fn record_generation(&mut self, time: f64) {
        self.generations.push_back(time);
        let cutoff = time - self.rate_window;
        while self.generations.front().is_some_and(|&t| t < cutoff) {
            self.generations.pop_front();
        }
    }

    /// Requests generated in `[now - window, now)`, per second.
    pub fn rate_estimate(&self, now: f64) -> f64 {
        let lo = self.generations.partition_point(|&t| t < now - self.rate_window);
        let hi = self.generations.partition_point(|&t| t < now);
        (hi - lo) as f64 / self.rate_window
    }

    pub fn reported_u(&self, controller: usize) -> f64 {
        self.pairs[controller].u_last
    }

    pub fn tau_ewma(&self, controller: usize) -> f64 {
        self.pairs[controller].tau_ewma
    }
}

/// Features of `controller` as seen by `switch` at time `now`.
pub fn extract_features(
    view: &SwitchView,
    setting: &NetworkSetting,
    switch: usize,
    controller: usize,
    now: f64,
    cfg: &FeatureConfig,
) -> ControllerFeatures {
    let p = &view.pairs[controller];
    ControllerFeatures([
        setting.capacities[controller] / cfg.alpha_ref,
        setting.delay[switch][controller],
        p.u_last,
        p.u_last - p.u_prev,
        p.tau_ewma,
        p.tau_delta,
        view.rate_estimate(now),
    ])
}

pub fn extract_all(
    view: &SwitchView,
    setting: &NetworkSetting,
    switch: usize,
    now: f64,
    cfg: &FeatureConfig,
) -> Vec<ControllerFeatures> {
    (0..setting.num_controllers())
        .map(|c| extract_features(view, setting, switch, c, now, cfg))
        .collect()
}

/// Network-wide statistics, the value function input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalStats {
    pub total_capacity: f64,
    pub weighted_avg_delay: f64,
    pub total_arrival_rate: f64,
    /// Newest first.
    pub tau_history: [f64; HISTORY_LEN],
    /// Newest first.
    pub util_history: [f64; HISTORY_LEN],
}

impl GlobalStats {
    pub fn at_start(setting: &NetworkSetting) -> Self {
        Self {
            total_capacity: setting.total_capacity(),
            weighted_avg_delay: setting.weighted_avg_delay(),
            total_arrival_rate: setting.total_arrival_rate(),
            tau_history: [0.0; HISTORY_LEN],
            util_history: [0.0; HISTORY_LEN],
        }
    }

    pub fn push_window(&mut self, mean_tau: f64, utilization: f64) {
        self.tau_history.rotate_right(1);
        self.tau_history[0] = mean_tau;
        self.util_history.rotate_right(1);
        self.util_history[0] = utilization;
    }

    /// Network input encoding: rates in units of 10^4 requests/second,
    /// times in units of 10 ms.
    pub fn to_input(&self) -> [f64; GLOBAL_DIM] {
        let mut x = [0.0; GLOBAL_DIM];
        x[0] = self.total_capacity / 1e4;
        x[1] = self.weighted_avg_delay * 100.0;
        x[2] = self.total_arrival_rate / 1e4;
        for k in 0..HISTORY_LEN {
            x[3 + k] = self.tau_history[k] * 100.0;
            x[3 + HISTORY_LEN + k] = self.util_history[k];
        }
        x
    }
}
