use std::collections::VecDeque;

use super::event::InFlight;

/// A request held by a controller, waiting or in service.
#[derive(Debug, Clone, Copy)]
pub struct Queued {
    pub request: InFlight,
    pub arrived_at: f64,
    pub starts_at: f64,
}

/// FIFO controller with deterministic service time `1 / α`.
#[derive(Debug, Clone)]
pub struct ControllerRuntime {
    pub fifo: VecDeque<Queued>,
    pub busy_until: f64,
    pub service_time: f64,
    pub last_reported_u: f64,
    /// Total service time of every request accepted so far.
    committed_busy: f64,
    busy_at_last_report: f64,
    last_report_time: f64,
    /// Time integral of `fifo.len()` up to `area_time`.
    queue_area: f64,
    area_time: f64,
    pub arrivals: u64,
    pub completions: u64,
    pub total_wait: f64,
    pub max_queue: usize,
}

impl ControllerRuntime {
    pub fn new(capacity: f64) -> Self {
        Self {
            fifo: VecDeque::new(),
            busy_until: 0.0,
            service_time: 1.0 / capacity,
            last_reported_u: 0.0,
            committed_busy: 0.0,
            busy_at_last_report: 0.0,
            last_report_time: 0.0,
            queue_area: 0.0,
            area_time: 0.0,
            arrivals: 0,
            completions: 0,
            total_wait: 0.0,
            max_queue: 0,
        }
    }

    fn advance_area(&mut self, now: f64) {
        self.queue_area += self.fifo.len() as f64 * (now - self.area_time);
        self.area_time = now;
    }

    /// Enqueues a request arriving at `now`; returns its completion time.
    pub fn accept(&mut self, now: f64, request: InFlight) -> f64 {
        self.advance_area(now);
        let starts_at = now.max(self.busy_until);
        self.busy_until = starts_at + self.service_time;
        self.committed_busy += self.service_time;
        self.total_wait += starts_at - now;
        self.arrivals += 1;
        self.fifo.push_back(Queued { request, arrived_at: now, starts_at });
        self.max_queue = self.max_queue.max(self.fifo.len());
        self.busy_until
    }

    pub fn complete(&mut self, now: f64) -> Queued {
        self.advance_area(now);
        self.completions += 1;
        self.fifo.pop_front().expect("service completion with an empty queue")
    }

    /// Cumulative busy time up to `t`. Valid for `t` no earlier than the latest accepted arrival.
    pub fn busy_time_until(&self, t: f64) -> f64 {
        self.committed_busy - (self.busy_until - t).max(0.0)
    }

    /// Busy fraction since the previous report.
    pub fn report(&mut self, now: f64) -> f64 {
        let busy = self.busy_time_until(now);
        let window = now - self.last_report_time;
        let u = if window > 0.0 {
            ((busy - self.busy_at_last_report) / window).clamp(0.0, 1.0)
        } else {
            0.0
        };
        self.busy_at_last_report = busy;
        self.last_report_time = now;
        self.last_reported_u = u;
        u
    }

    /// Time-averaged number of requests held (queued or in service) over `[0, now]`.
    pub fn mean_queue_len(&self, now: f64) -> f64 {
        if now <= 0.0 {
            return 0.0;
        }
        let area = self.queue_area + self.fifo.len() as f64 * (now - self.area_time);
        area / now
    }

    pub fn mean_wait(&self) -> f64 {
        if self.arrivals == 0 {
            0.0
        } else {
            self.total_wait / self.arrivals as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(id: u64) -> InFlight {
        InFlight { id, switch: 0, controller: 0, generated_at: 0.0 }
    }

    #[test]
    fn fifo_wait_algebra() {
        let mut c = ControllerRuntime::new(1000.0);
        assert!((c.accept(0.0, req(0)) - 0.001).abs() < 1e-15);
        // Second arrival 0.3 ms later waits for the first.
        assert!((c.accept(0.0003, req(1)) - 0.002).abs() < 1e-15);
        assert!((c.mean_wait() - 0.00035).abs() < 1e-15);
        assert_eq!(c.complete(0.001).request.id, 0);
        assert_eq!(c.complete(0.002).request.id, 1);
    }

    #[test]
    fn utilization_reports() {
        let mut c = ControllerRuntime::new(1000.0);
        assert_eq!(c.report(0.05), 0.0);
        // 25 back-to-back requests = 25 ms of work in a 50 ms window.
        for i in 0..25 {
            c.accept(0.05, req(i));
        }
        assert!((c.report(0.10) - 0.5).abs() < 1e-12);
        // Saturated for the whole next window.
        for i in 0..100 {
            c.accept(0.10, req(100 + i));
        }
        assert!((c.report(0.15) - 1.0).abs() < 1e-12);
        assert!((c.last_reported_u - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partially_elapsed_work_counts_only_past_busy_time() {
        let mut c = ControllerRuntime::new(100.0);
        c.accept(0.0, req(0));
        c.accept(0.0, req(1));
        // 20 ms committed, 10 ms elapsed.
        assert!((c.busy_time_until(0.01) - 0.01).abs() < 1e-15);
        assert!((c.busy_time_until(0.05) - 0.02).abs() < 1e-15);
    }
}
