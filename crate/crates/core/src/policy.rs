//! The dispatch-policy interface shared by the learned scheduling function
//! and the heuristic baselines.

use rand_chacha::ChaCha8Rng;

use crate::dispatch::features::{GlobalStats, SwitchView};
use crate::error::DispatchError;
use crate::setting::NetworkSetting;

/// Random source owned by one episode.
pub type SimRng = ChaCha8Rng;

/// What a switch's dispatching system can see when a request is generated.
#[derive(Debug, Clone, Copy)]
pub struct DispatchContext<'a> {
    pub setting: &'a NetworkSetting,
    pub switch: usize,
    pub now: f64,
    pub view: &'a SwitchView,
    pub globals: &'a GlobalStats,
}

pub trait DispatchPolicy {
    fn name(&self) -> String;

    /// Called once before an episode starts.
    fn reset(&mut self, _setting: &NetworkSetting) {}

    fn select(&mut self, ctx: &DispatchContext<'_>, rng: &mut SimRng) -> Result<usize, DispatchError>;
}

impl<P: DispatchPolicy + ?Sized> DispatchPolicy for Box<P> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn reset(&mut self, setting: &NetworkSetting) {
        (**self).reset(setting)
    }

    fn select(&mut self, ctx: &DispatchContext<'_>, rng: &mut SimRng) -> Result<usize, DispatchError> {
        (**self).select(ctx, rng)
    }
}
