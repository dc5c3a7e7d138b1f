//! PPO training of the scheduling function.
//!
//! Each learning iteration runs the current dispatching system for `n`
//! simulation steps, estimates advantages with GAE from the value network,
//! and takes minibatch Adam steps on the clipped surrogate (scheduling
//! network, ascent) and on squared value error (value network, descent).
//! The surrogate gradient flows through the top-m projection.

mod adam;
mod config;
mod gae;
mod surrogate;
mod trainer;

pub use adam::Adam;
pub use config::TrainingConfig;
pub use gae::{gae, normalize};
pub use surrogate::{
    surrogate_gradient, surrogate_gradient_into, surrogate_objective, value_gradient, value_gradient_into,
    ClipRegion, SurrogateStep, Transition,
};
pub use trainer::{
    derive_seed, estimate_advantages, train, train_episode, train_with, value_spec, Advantages, IterationRecord,
    Learner, TrainOutput, TrainingLog, Trajectory, UpdateStats,
};
