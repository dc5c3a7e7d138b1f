use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::setting::NetworkSetting;

/// A control-plane request raised by a switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    pub id: u64,
    pub origin_switch: usize,
    pub generated_at: f64,
    pub dispatched_to: Option<usize>,
}

struct SwitchSource {
    rng: ChaCha8Rng,
    gap: Option<Exp<f64>>,
    next: Option<f64>,
}

impl SwitchSource {
    fn draw(&mut self, from: f64) -> Option<f64> {
        self.gap.as_ref().map(|g| from + g.sample(&mut self.rng))
    }
}

/// Merged Poisson request stream of all switches, in generation order.
///
/// Each switch has its own random stream so adding a switch does not
/// perturb the others. Ties go to the lower switch index.
pub struct ArrivalStream {
    sources: Vec<SwitchSource>,
    horizon: f64,
    next_id: u64,
}

impl ArrivalStream {
    pub fn new(rates: &[f64], seed: u64, horizon: f64) -> Self {
        let sources = rates
            .iter()
            .enumerate()
            .map(|(s, &rate)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(s as u64 + 1);
                let mut src = SwitchSource {
                    rng,
                    gap: (rate > 0.0).then(|| Exp::new(rate).expect("positive finite rate")),
                    next: None,
                };
                src.next = src.draw(0.0);
                src
            })
            .collect();
        Self { sources, horizon, next_id: 0 }
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.sources
            .iter()
            .filter_map(|s| s.next)
            .min_by(f64::total_cmp)
            .filter(|&t| t <= self.horizon)
    }
}

impl Iterator for ArrivalStream {
    type Item = Request;

    fn next(&mut self) -> Option<Request> {
        let (switch, time) = self
            .sources
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.next.map(|t| (i, t)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))?;
        if time > self.horizon {
            return None;
        }
        let src = &mut self.sources[switch];
        src.next = src.draw(time);
        let id = self.next_id;
        self.next_id += 1;
        Some(Request { id, origin_switch: switch, generated_at: time, dispatched_to: None })
    }
}

/// The request stream of one episode of `setting`, up to `t_max`.
pub fn generate_arrivals(setting: &NetworkSetting, seed: u64) -> ArrivalStream {
    ArrivalStream::new(&setting.arrival_rates, seed, setting.t_max)
}
