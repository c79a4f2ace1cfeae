//! Feed-forward 5→H→4 tanh network, trained by full-batch backpropagation on
//! the obstacle-bit decision table.

mod fixed;
mod network;
mod train;
mod weights;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use fixed::{FixedError, FixedInference, FixedNetwork};
pub use network::{Activations, Network, N_IN, N_OUT};
pub use train::{train, train_from, Hyperparams, Trained, TrainingSet, TARGET_MAGNITUDE};
pub use weights::{export_weights_float, import_weights_float};

use crate::sensor::ObstacleBits;
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum AnnError {
    #[error("layer dimensions inconsistent: {0}")]
    Dimension(String),
    #[error("weights must be finite")]
    NonFinite,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("input {0} appears with conflicting targets")]
    ConflictingTargets(ObstacleBits),
    #[error("invalid hyperparameter: {0}")]
    Hyperparams(&'static str),
    #[error("no convergence after {epochs} epochs (sse {sse}); misclassified rows: {failing}")]
    NonConvergence { epochs: u32, sse: f64, failing: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Motion decision; `Stop` is the table's "no movement" row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Decision {
    Straight,
    Left,
    Right,
    Stop,
}

impl Decision {
    /// Output-layer order.
    pub const ALL: [Decision; N_OUT] = [Decision::Straight, Decision::Left, Decision::Right, Decision::Stop];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(k: usize) -> Option<Self> {
        Self::ALL.get(k).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Decision::Straight => "straight",
            Decision::Left => "left",
            Decision::Right => "right",
            Decision::Stop => "stop",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Decision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "straight" => Ok(Decision::Straight),
            "left" => Ok(Decision::Left),
            "right" => Ok(Decision::Right),
            "stop" | "no-movement" | "no_movement" => Ok(Decision::Stop),
            other => Err(format!("unknown decision `{other}`")),
        }
    }
}

/// Outcome of thresholding the output layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Decided(Decision),
    /// None or several outputs cleared the activation threshold.
    Undecided,
}

impl Classification {
    pub fn decision(self) -> Option<Decision> {
        match self {
            Classification::Decided(d) => Some(d),
            Classification::Undecided => None,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Decided(d) => d.fmt(f),
            Classification::Undecided => f.write_str("undecided"),
        }
    }
}

pub const DEFAULT_ACTIVATION_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionConfig<T> {
    pub activation_threshold: T,
}

impl<T: Scalar> DecisionConfig<T> {
    pub fn new(activation_threshold: T) -> Result<Self, AnnError> {
        if !(activation_threshold > T::zero() && activation_threshold < T::one()) {
            return Err(AnnError::Hyperparams("activation threshold must lie in (0, 1)"));
        }
        Ok(Self { activation_threshold })
    }
}

impl<T: Scalar> Default for DecisionConfig<T> {
    fn default() -> Self {
        Self { activation_threshold: T::lit(DEFAULT_ACTIVATION_THRESHOLD) }
    }
}

/// Picks the unique output at or above the activation threshold.
pub fn classify_outputs<T: Scalar>(out: &[T; N_OUT], cfg: &DecisionConfig<T>) -> Classification {
    let mut hot = out.iter().enumerate().filter(|(_, a)| **a >= cfg.activation_threshold);
    match (hot.next(), hot.next()) {
        (Some((k, _)), None) => Classification::Decided(Decision::ALL[k]),
        _ => Classification::Undecided,
    }
}

pub fn classify<T: Scalar>(net: &Network<T>, bits: ObstacleBits, cfg: &DecisionConfig<T>) -> Classification {
    classify_outputs(&net.forward(&bits.as_inputs()).out, cfg)
}
