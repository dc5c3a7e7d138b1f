//! Event-driven simulation of the SDN control plane.
//!
//! Switches raise requests as independent Poisson streams. Each request is
//! forwarded to a controller picked by the switch's dispatching system,
//! reaches it after the one-way delay `D[s][c]`, waits in the controller's
//! FIFO queue, is served in `1 / α_c` seconds, and the response travels back
//! over the same delay. Controllers broadcast their busy fraction every
//! report period; switches see each report after the same one-way delay.
//!
//! A simulation step is the generation of one request. The reward of a step
//! is `Σ 1/τ` over the responses delivered since the previous step.

mod arrivals;
mod controller;
mod episode;
mod event;

use std::collections::BinaryHeap;

pub use arrivals::{generate_arrivals, ArrivalStream, Request};
pub use controller::ControllerRuntime;
pub use episode::{episode_policy_rng, run_episode, EpisodeLog, EpisodeOptions, StepRecord};
pub use event::{EventKind, InFlight};

use event::Event;
use thiserror::Error;

use crate::dispatch::features::{FeatureConfig, GlobalStats, SwitchView};
use crate::policy::DispatchContext;
use crate::setting::NetworkSetting;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("controller {controller} out of range for {controllers} controllers")]
    InvalidController { controller: usize, controllers: usize },
    #[error("no request is waiting to be dispatched")]
    NoPendingRequest,
    #[error("the previous request has not been dispatched")]
    PendingRequest,
    #[error("the episode has already ended")]
    Finished,
}

/// Outcome of advancing the simulation to the next decision point.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    /// A switch generated `request`; it must be dispatched before advancing again.
    Request { request: Request, reward: f64, globals: GlobalStats },
    /// The horizon was reached. `reward` covers the tail after the last request.
    End { reward: f64 },
}

/// Rewards gathered since the last decision point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RewardAccumulator {
    pub pending_sum: f64,
    pub responses: u64,
}

impl RewardAccumulator {
    fn add(&mut self, tau: f64) {
        self.pending_sum += 1.0 / tau;
        self.responses += 1;
    }

    fn take(&mut self) -> f64 {
        let r = self.pending_sum;
        *self = Self::default();
        r
    }
}

/// Where every generated request currently is.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RequestCounts {
    pub generated: u64,
    pub awaiting_dispatch: u64,
    pub to_controller: u64,
    pub at_controller: u64,
    pub to_switch: u64,
    pub delivered: u64,
}

impl RequestCounts {
    pub fn in_flight(&self) -> u64 {
        self.awaiting_dispatch + self.to_controller + self.to_switch
    }

    pub fn conserved(&self) -> bool {
        self.generated == self.in_flight() + self.at_controller + self.delivered
    }
}

/// One delivered response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub request: InFlight,
    pub delivered_at: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ResponseStats {
    pub delivered: u64,
    pub sum_tau: f64,
    pub sum_inv_tau: f64,
}

impl ResponseStats {
    pub fn mean_tau(&self) -> f64 {
        if self.delivered == 0 {
            0.0
        } else {
            self.sum_tau / self.delivered as f64
        }
    }
}

pub struct Simulator {
    setting: NetworkSetting,
    now: f64,
    arrivals: ArrivalStream,
    events: BinaryHeap<Event>,
    seq: u64,
    controllers: Vec<ControllerRuntime>,
    views: Vec<SwitchView>,
    globals: GlobalStats,
    window_tau_sum: f64,
    window_tau_count: u64,
    reward: RewardAccumulator,
    pending: Option<Request>,
    finished: bool,
    counts: RequestCounts,
    stats: ResponseStats,
    distribution: Vec<Vec<u64>>,
    response_log: Option<Vec<Response>>,
}

impl Simulator {
    pub fn new(setting: &NetworkSetting, seed: u64) -> Self {
        Self::with_features(setting, seed, &FeatureConfig::default())
    }

    pub fn with_features(setting: &NetworkSetting, seed: u64, features: &FeatureConfig) -> Self {
        let n_c = setting.num_controllers();
        let mut sim = Self {
            setting: setting.clone(),
            now: 0.0,
            arrivals: generate_arrivals(setting, seed),
            events: BinaryHeap::new(),
            seq: 0,
            controllers: setting.capacities.iter().map(|&a| ControllerRuntime::new(a)).collect(),
            views: (0..setting.num_switches())
                .map(|_| SwitchView::new(n_c, features, setting.time_scale))
                .collect(),
            globals: GlobalStats::at_start(setting),
            window_tau_sum: 0.0,
            window_tau_count: 0,
            reward: RewardAccumulator::default(),
            pending: None,
            finished: false,
            counts: RequestCounts::default(),
            stats: ResponseStats::default(),
            distribution: vec![vec![0; n_c]; setting.num_switches()],
            response_log: None,
        };
        if setting.report_period <= setting.t_max {
            sim.schedule(setting.report_period, EventKind::StatusReport);
        }
        sim
    }

    /// Keep every delivered response for inspection.
    pub fn record_responses(&mut self) {
        self.response_log.get_or_insert_with(Vec::new);
    }

    pub fn responses(&self) -> &[Response] {
        self.response_log.as_deref().unwrap_or(&[])
    }

    pub fn setting(&self) -> &NetworkSetting {
        &self.setting
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn controllers(&self) -> &[ControllerRuntime] {
        &self.controllers
    }

    pub fn views(&self) -> &[SwitchView] {
        &self.views
    }

    pub fn globals(&self) -> &GlobalStats {
        &self.globals
    }

    pub fn pending(&self) -> Option<&Request> {
        self.pending.as_ref()
    }

    pub fn counts(&self) -> RequestCounts {
        let mut c = self.counts;
        c.at_controller = self.controllers.iter().map(|k| k.fifo.len() as u64).sum();
        c.awaiting_dispatch = u64::from(self.pending.is_some());
        c
    }

    pub fn stats(&self) -> &ResponseStats {
        &self.stats
    }

    /// `distribution[s][c]`: requests switch `s` dispatched to controller `c`.
    pub fn distribution(&self) -> &[Vec<u64>] {
        &self.distribution
    }

    /// Observation for the request awaiting dispatch.
    pub fn context(&self) -> Option<DispatchContext<'_>> {
        self.pending.map(|r| DispatchContext {
            setting: &self.setting,
            switch: r.origin_switch,
            now: self.now,
            view: &self.views[r.origin_switch],
            globals: &self.globals,
        })
    }

    /// Runs the event loop up to the next request generation, or to `t_max`.
    pub fn advance_to_next_request(&mut self) -> Result<Step, SimError> {
        if self.finished {
            return Err(SimError::Finished);
        }
        if self.pending.is_some() {
            return Err(SimError::PendingRequest);
        }
        match self.arrivals.peek_time() {
            Some(t) => {
                self.process_until(t, false);
                self.now = t;
                let request = self.arrivals.next().expect("peeked arrival");
                self.counts.generated += 1;
                self.pending = Some(request);
                Ok(Step::Request { request, reward: self.reward.take(), globals: self.globals })
            }
            None => {
                let t_max = self.setting.t_max;
                self.process_until(t_max, true);
                self.now = t_max;
                self.finished = true;
                Ok(Step::End { reward: self.reward.take() })
            }
        }
    }

    /// Forwards the pending request to `controller`.
    pub fn dispatch_request(&mut self, controller: usize) -> Result<Request, SimError> {
        let n_c = self.setting.num_controllers();
        if controller >= n_c {
            return Err(SimError::InvalidController { controller, controllers: n_c });
        }
        let mut request = self.pending.take().ok_or(SimError::NoPendingRequest)?;
        request.dispatched_to = Some(controller);
        let s = request.origin_switch;
        self.views[s].record_generation(self.now);
        self.distribution[s][controller] += 1;
        self.counts.to_controller += 1;
        let flight = InFlight { id: request.id, switch: s, controller, generated_at: request.generated_at };
        self.schedule(self.now + self.setting.delay[s][controller], EventKind::ArriveAtController(flight));
        Ok(request)
    }

    fn schedule(&mut self, time: f64, kind: EventKind) {
        self.events.push(Event { time, seq: self.seq, kind });
        self.seq += 1;
    }

    fn process_until(&mut self, limit: f64, inclusive: bool) {
        while let Some(ev) = self.events.peek() {
            if ev.time > limit || (!inclusive && ev.time == limit) {
                break;
            }
            let ev = self.events.pop().expect("peeked event");
            self.now = ev.time;
            self.handle(ev);
        }
    }

    fn handle(&mut self, ev: Event) {
        let t = ev.time;
        match ev.kind {
            EventKind::ArriveAtController(flight) => {
                self.counts.to_controller -= 1;
                let done = self.controllers[flight.controller].accept(t, flight);
                self.schedule(done, EventKind::ServiceComplete { controller: flight.controller });
            }
            EventKind::ServiceComplete { controller } => {
                let q = self.controllers[controller].complete(t);
                self.counts.to_switch += 1;
                let back = t + self.setting.delay[q.request.switch][controller];
                self.schedule(back, EventKind::ResponseAtSwitch(q.request));
            }
            EventKind::ResponseAtSwitch(flight) => {
                self.counts.to_switch -= 1;
                self.counts.delivered += 1;
                let tau = t - flight.generated_at;
                self.reward.add(tau);
                self.views[flight.switch].record_response(flight.controller, tau);
                self.window_tau_sum += tau;
                self.window_tau_count += 1;
                self.stats.delivered += 1;
                self.stats.sum_tau += tau;
                self.stats.sum_inv_tau += 1.0 / tau;
                if let Some(log) = self.response_log.as_mut() {
                    log.push(Response { request: flight, delivered_at: t, tau });
                }
            }
            EventKind::StatusReport => self.emit_status_reports(t),
            EventKind::ReportDelivered { switch, controller, u } => {
                self.views[switch].record_report(controller, u);
            }
        }
    }

    /// Measures every controller's busy fraction over the closing window and
    /// sends it towards every switch.
    fn emit_status_reports(&mut self, t: f64) {
        let total_cap = self.setting.total_capacity();
        let mut util = 0.0;
        for c in 0..self.controllers.len() {
            let u = self.controllers[c].report(t);
            util += u * self.setting.capacities[c] / total_cap;
            for s in 0..self.setting.num_switches() {
                let at = t + self.setting.delay[s][c];
                self.schedule(at, EventKind::ReportDelivered { switch: s, controller: c, u });
            }
        }
        let mean_tau = if self.window_tau_count > 0 {
            self.window_tau_sum / self.window_tau_count as f64
        } else {
            self.globals.tau_history[0]
        };
        self.globals.push_window(mean_tau, util);
        self.window_tau_sum = 0.0;
        self.window_tau_count = 0;
        let next = t + self.setting.report_period;
        if next <= self.setting.t_max {
            self.schedule(next, EventKind::StatusReport);
        }
    }
}
