//! Decision problems that tie the probabilistic and modal layers together.
//!
//! A [`Problem`] offers four policies from a current state. Each policy is
//! profiled by its goal and anti-goal reach probabilities under the true and
//! subjective kernels, compiled into Kripke frames, and audited for the
//! pattern where the subjectively best policy is in fact goal-inverting.

mod audit;
mod compile;
mod problem;
mod profile;

use thiserror::Error;

pub use audit::{argmax_set, ccb_audit, AuditReport, PolicyAudit, ARGMAX_TOLERANCE};
pub use compile::{
    bounded_outcomes, commit_world, outcome_frame, policy_atom, state_frame, whmm_to_kripke, ANTI_GOAL_ATOM,
    GOAL_ATOM,
};
pub use problem::{
    Policy, PolicyDocument, PolicyFlag, PolicyLabel, Problem, ProblemDocument, COMMIT_PREFIX,
};
pub use profile::{
    classify, outcome_profile, outcome_profiles, policy_reach, OutcomeClass, OutcomeProfile, BASELINE_MARGIN,
};

use crate::kripke::KripkeError;
use crate::whmm::WhmmError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BridgeError {
    #[error(transparent)]
    Model(#[from] WhmmError),
    #[error(transparent)]
    Frame(#[from] KripkeError),
    #[error("a problem needs exactly 4 policies, found {0}")]
    PolicyCount(usize),
    #[error("policy label {0} is used twice")]
    DuplicatePolicy(PolicyLabel),
    #[error("expected {expected} {flag:?} policies, found {found}")]
    FlagCount { flag: PolicyFlag, expected: usize, found: usize },
    #[error("invalid policy label {0:?}, expected one of A, B, C, D")]
    InvalidLabel(String),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("current state {state:?} has initial probability {mass}, expected 1")]
    CurrentNotCertain { state: String, mass: f64 },
    #[error("policy {policy} starts at {state:?}, which the current state cannot reach in one step")]
    UnreachableFirstAction { policy: PolicyLabel, state: String },
    #[error("state label {0:?} uses the reserved prefix \"commit:\"")]
    ReservedLabel(String),
    #[error("the model has no goal state")]
    NoGoalState,
    #[error("outcome state {0:?} must be absorbing")]
    OutcomeNotAbsorbing(String),
    #[error("horizon must be at least 1")]
    HorizonZero,
    #[error("threshold {0} is outside [0, 1)")]
    InvalidThreshold(f64),
    #[error("malformed problem document: {0}")]
    Json(String),
}
