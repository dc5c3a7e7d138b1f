use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while loading or validating a network setting.
#[derive(Debug, Error)]
pub enum SettingError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed setting file{}: {message}", fmt_line(*.line))]
    Malformed { line: Option<usize>, message: String },
    #[error("invalid setting{}: {message}", fmt_line(*.line))]
    Invalid { line: Option<usize>, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

fn fmt_line(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" (line {l})"),
        None => String::new(),
    }
}

/// Errors from the scheduling-function and value networks.
#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("input length {got} does not match network input dimension {expected}")]
    InputDim { expected: usize, got: usize },
    #[error("non-finite input at position {0}")]
    NonFiniteInput(usize),
}

/// Errors from the dispatching system (feature scoring and projection).
#[derive(Debug, Error, PartialEq)]
pub enum DispatchError {
    #[error("no controllers to dispatch to")]
    NoControllers,
    #[error("support size m must be at least 1")]
    ZeroSupport,
    #[error("priority vector must be strictly positive and finite (entry {index} = {value})")]
    InvalidPriority { index: usize, value: f64 },
    #[error("action {action} out of range for {controllers} controllers")]
    ActionOutOfRange { action: usize, controllers: usize },
    #[error(transparent)]
    Network(#[from] NnError),
}

/// Errors from checkpoint persistence.
#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported checkpoint version `{0}`")]
    Version(String),
    #[error("truncated checkpoint: {0}")]
    Truncated(String),
    #[error("corrupt checkpoint (line {line}): {message}")]
    Corrupt { line: usize, message: String },
    #[error("checkpoint has no network named `{0}`")]
    MissingNetwork(String),
}

/// Errors from the PPO trainer.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("no network settings to train on")]
    NoSettings,
    #[error("behaviour probability {0} is not positive; transition is corrupt")]
    CorruptProbability(f64),
    #[error("non-finite {which} gradient at epoch {epoch}, minibatch {minibatch}")]
    NonFiniteGradient {
        which: &'static str,
        epoch: usize,
        minibatch: usize,
    },
    #[error("invalid training config: {0}")]
    Config(String),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}
