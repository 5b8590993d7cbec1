//! Simulated and recorded runs of the policy-choice experiment.
//!
//! A participant reads a problem, sees the current state and the goal, and
//! immediately picks one of four policies. Simulated agents pick by
//! probability matching over their subjective goal probabilities; cohorts are
//! summarized against uniform random choice with an exact binomial test.

mod choice;
mod record;
mod stats;
mod summary;

use thiserror::Error;

pub use choice::{
    choice_distribution, derive_seed, distribution_from_scores, draw_choice, run_cohort, simulated_cohort_id,
    subjective_scores, AgentConfig, SIMULATED_PHASE_SPACING_MS,
};
pub use record::{parse_records, read_records, to_jsonl, ChoiceRecord, RecordLog, Source};
pub use stats::{binomial_pmf, binomial_test_two_sided, clopper_pearson};
pub use summary::{summarize, summarize_counts, CohortSummary, LabelSummary, BASELINE, CI_LEVEL};

use crate::bridge::BridgeError;
use crate::whmm::WhmmError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error("sharpness {0} must be positive and finite")]
    InvalidGamma(f64),
    #[error("score {0} must be a finite non-negative number")]
    InvalidScore(f64),
    #[error("cohort is empty")]
    EmptyCohort,
    #[error("record for problem {found:?} in a cohort for {expected:?}")]
    MixedProblemIds { expected: String, found: String },
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<WhmmError> for ExperimentError {
    fn from(e: WhmmError) -> Self {
        ExperimentError::Bridge(e.into())
    }
}
