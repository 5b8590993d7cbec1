use serde::{Deserialize, Serialize};

use super::compile::{commit_world, outcome_frame, policy_atom, GOAL_ATOM};
use super::profile::{outcome_profiles, OutcomeClass, OutcomeProfile};
use super::{BridgeError, PolicyFlag, PolicyLabel, Problem};
use crate::kripke::{detect_ccb, CcbVerdict};

/// Two subjective scores closer than this are treated as tied.
pub const ARGMAX_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyAudit {
    pub label: PolicyLabel,
    pub flag: PolicyFlag,
    pub text: String,
    /// Worlds the commitment world sees in the unrolled frame.
    pub outcomes: Vec<String>,
    pub verdict: CcbVerdict,
    pub profile: OutcomeProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub problem_id: String,
    pub theta: f64,
    pub horizon: usize,
    pub policies: Vec<PolicyAudit>,
    /// Unique policy with the highest subjective goal probability, if any.
    pub subjective_argmax: Option<PolicyLabel>,
    /// The subjectively best policy is, in truth, goal-inverting.
    pub ccb_footprint: bool,
    pub notes: Vec<String>,
}

/// Labels whose score is within [`ARGMAX_TOLERANCE`] of the maximum.
pub fn argmax_set(scores: &[(PolicyLabel, f64)]) -> Vec<PolicyLabel> {
    let best = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    scores.iter().filter(|s| best - s.1 <= ARGMAX_TOLERANCE).map(|s| s.0).collect()
}

/// Runs the modal check and the outcome profile for every policy.
///
/// `theta` must lie in `[0, 1)`.
pub fn ccb_audit(problem: &Problem, theta: f64) -> Result<AuditReport, BridgeError> {
    if !(0.0..1.0).contains(&theta) {
        return Err(BridgeError::InvalidThreshold(theta));
    }
    let profiles = outcome_profiles(problem)?;
    let mut policies = Vec::with_capacity(4);
    for (policy, profile) in problem.policies().iter().zip(profiles) {
        let frame = outcome_frame(problem, policy.label, theta);
        let verdict = detect_ccb(&frame, &commit_world(policy.label), &policy_atom(policy.label), GOAL_ATOM)?;
        policies.push(PolicyAudit {
            label: policy.label,
            flag: policy.flag,
            text: policy.text.clone(),
            outcomes: frame.worlds()[1..].to_vec(),
            verdict,
            profile,
        });
    }

    let mut notes = Vec::new();
    let scores: Vec<(PolicyLabel, f64)> =
        policies.iter().map(|p| (p.label, p.profile.p_goal_subjective)).collect();
    let top = argmax_set(&scores);
    let subjective_argmax = match top.as_slice() {
        [only] => Some(*only),
        tied => {
            let names: Vec<&str> = tied.iter().map(|l| l.as_str()).collect();
            notes.push(format!("subjective goal probability is tied between {}", names.join(", ")));
            None
        }
    };
    if !policies.iter().any(|p| p.profile.classification == OutcomeClass::GoalInverting) {
        notes.push("no policy is goal-inverting".to_string());
    }
    let ccb_footprint = subjective_argmax
        .is_some_and(|l| policies[l.index()].profile.classification == OutcomeClass::GoalInverting);

    Ok(AuditReport {
        problem_id: problem.id.clone(),
        theta,
        horizon: problem.horizon(),
        policies,
        subjective_argmax,
        ccb_footprint,
        notes,
    })
}
