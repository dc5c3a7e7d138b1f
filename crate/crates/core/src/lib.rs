//! Request dispatching for multi-controller SDN control planes.
//!
//! The crate bundles a discrete-event simulator of switches and FIFO
//! controllers ([`sim`]), a learned dispatching system that scores
//! controllers with a small neural network and samples from a top-m
//! projection of the scores ([`dispatch`]), a PPO trainer that learns the
//! scoring network ([`ppo`]), heuristic baselines ([`baselines`]) and an
//! experiment harness that compares them ([`experiment`]).

pub mod baselines;
pub mod dispatch;
pub mod error;
pub mod experiment;
pub mod nn;
pub mod policy;
pub mod ppo;
pub mod setting;
pub mod sim;

pub use baselines::{RandomPolicy, WrrPolicy, WrrState};
pub use dispatch::LearnedPolicy;
pub use nn::{Checkpoint, MlpSpec, OutputHead, ParamStore};
pub use policy::{DispatchContext, DispatchPolicy, SimRng};
pub use setting::NetworkSetting;
pub use sim::{run_episode, EpisodeLog, EpisodeOptions, Simulator, Step};
