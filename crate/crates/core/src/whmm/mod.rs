//! Weighted Markov models of biased decision making.
//!
//! A [`WeightedMarkovModel`] pairs ground-truth dynamics `A` with a per-state
//! somatic weight vector `w`. The decision maker does not see `A`; they act on
//! the modulated kernel
//!
//! ```text
//! ã_ij = a_ij · w_j / Σ_k a_ik · w_k
//! ```
//!
//! so a weight above 1 boosts the subjective likelihood of entering a state
//! and a weight below 1 flattens it. With all weights equal the model reduces
//! to a plain Markov chain.
//!
//! Every inference routine takes a [`Kernel`] selecting `A` or `ã`, works in
//! log space, and represents probability zero as negative infinity.

mod estimate;
mod inference;
pub mod io;
mod model;
mod sampling;

use std::fmt;

use thiserror::Error;

pub use estimate::{estimate_weights, log_likelihood, EstimateOptions, WeightFit};
pub use inference::{forward_likelihood, reach_probability, viterbi_decode, ViterbiPath};
pub use model::{
    InitialDistribution, Kernel, SomaticWeights, StateRole, StateSpace, TransitionMatrix,
    WeightedMarkovModel, STOCHASTIC_TOLERANCE,
};
pub use sampling::{sample_trajectory, transition_counts};
pub(crate) use sampling::draw_index;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WhmmError {
    #[error("{what} has dimension {found}, expected {expected}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("transition row {row} sums to {sum}, expected 1")]
    NotRowStochastic { row: usize, sum: f64 },
    #[error("transition entry ({row}, {col}) = {value} is outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },
    #[error("weight {index} = {value} must be positive and finite")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("invalid initial distribution: {0}")]
    InvalidInitial(String),
    #[error("state space is empty")]
    EmptyStateSpace,
    #[error("state {index} has an empty label")]
    EmptyLabel { index: usize },
    #[error("duplicate state label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("weighted row {row} has zero mass")]
    DegenerateRow { row: usize },
    #[error("state {state} is out of range for a model with {n} states")]
    StateOutOfRange { state: usize, n: usize },
    #[error("path position {position} holds state {state}, out of range for {n} states")]
    PathStateOutOfRange { position: usize, state: usize, n: usize },
    #[error("trajectory is empty")]
    EmptyPath,
    #[error("target set is empty")]
    EmptyTargetSet,
    #[error("horizon must be at least 1")]
    HorizonZero,
    #[error("no positive-probability path from {from} to {to} within {horizon} steps")]
    NoPath { from: usize, to: usize, horizon: usize },
    #[error("no observed paths")]
    EmptyObservations,
    #[error("observed path {path} has probability zero under the base dynamics")]
    ImpossibleObservation { path: usize },
}

/// Natural-log probability. `LogProb::ZERO` (negative infinity) is probability zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(pub f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    pub fn from_prob(p: f64) -> Self {
        LogProb(p.ln())
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// An ordered sequence of state indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trajectory(Vec<usize>);

impl Trajectory {
    pub fn new(states: Vec<usize>) -> Result<Self, WhmmError> {
        if states.is_empty() {
            return Err(WhmmError::EmptyPath);
        }
        Ok(Self(states))
    }

    pub fn states(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of transitions.
    pub fn steps(&self) -> usize {
        self.0.len() - 1
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// Checks every index against the model's state count.
    pub fn check(&self, model: &WeightedMarkovModel) -> Result<(), WhmmError> {
        let n = model.n();
        match self.0.iter().enumerate().find(|(_, &s)| s >= n) {
            Some((position, &state)) => Err(WhmmError::PathStateOutOfRange { position, state, n }),
            None => Ok(()),
        }
    }

    /// True when the first state has positive initial mass and every step
    /// has positive probability under `kernel`.
    pub fn is_feasible(&self, model: &WeightedMarkovModel, kernel: Kernel) -> bool {
        if self.check(model).is_err() || model.initial().probs()[self.0[0]] <= 0.0 {
            return false;
        }
        let m = model.kernel(kernel);
        self.0.windows(2).all(|w| m.get(w[0], w[1]) > 0.0)
    }
}

impl AsRef<[usize]> for Trajectory {
    fn as_ref(&self) -> &[usize] {
        &self.0
    }
}
