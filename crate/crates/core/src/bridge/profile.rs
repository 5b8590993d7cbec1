use serde::{Deserialize, Serialize};

use super::{BridgeError, PolicyLabel, Problem};
use crate::whmm::{reach_probability, Kernel};

/// Slack used when comparing a policy's goal probability with the baseline.
pub const BASELINE_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeClass {
    GoalReaching,
    GoalInverting,
    Arbitrary,
}

/// Goal and anti-goal reach probabilities for one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProfile {
    pub policy: PolicyLabel,
    pub p_goal_true: f64,
    pub p_antigoal_true: f64,
    pub p_goal_subjective: f64,
    pub p_antigoal_subjective: f64,
    /// Mean true goal probability over all four policies.
    pub baseline: f64,
    pub classification: OutcomeClass,
}

/// Goal-inverting: more likely to end in the anti-goal than the goal, and
/// below the random-policy baseline. Goal-reaching: above the baseline and
/// more likely to reach the goal than the anti-goal. Anything else is
/// arbitrary.
pub fn classify(p_goal: f64, p_anti: f64, baseline: f64) -> OutcomeClass {
    if p_anti > p_goal && p_goal < baseline - BASELINE_MARGIN {
        OutcomeClass::GoalInverting
    } else if p_goal > baseline + BASELINE_MARGIN && p_goal > p_anti {
        OutcomeClass::GoalReaching
    } else {
        OutcomeClass::Arbitrary
    }
}

fn reach(problem: &Problem, from: usize, targets: &[usize], kernel: Kernel) -> Result<f64, BridgeError> {
    if targets.is_empty() {
        return Ok(0.0);
    }
    Ok(reach_probability(problem.model(), from, targets, problem.horizon(), kernel)?)
}

/// Raw probabilities `(goal, anti_goal)` from the policy's first action state.
pub fn policy_reach(problem: &Problem, label: PolicyLabel, kernel: Kernel) -> Result<(f64, f64), BridgeError> {
    let from = problem.policy(label).first_action_state;
    Ok((
        reach(problem, from, problem.goal_states(), kernel)?,
        reach(problem, from, problem.anti_goal_states(), kernel)?,
    ))
}

/// Profiles for all four policies, ordered by label.
pub fn outcome_profiles(problem: &Problem) -> Result<Vec<OutcomeProfile>, BridgeError> {
    let mut raw = Vec::with_capacity(4);
    for label in PolicyLabel::ALL {
        let (g, a) = policy_reach(problem, label, Kernel::True)?;
        let (gs, as_) = policy_reach(problem, label, Kernel::Subjective)?;
        raw.push((label, g, a, gs, as_));
    }
    let baseline = raw.iter().map(|r| r.1).sum::<f64>() / 4.0;
    Ok(raw
        .into_iter()
        .map(|(policy, g, a, gs, as_)| OutcomeProfile {
            policy,
            p_goal_true: g,
            p_antigoal_true: a,
            p_goal_subjective: gs,
            p_antigoal_subjective: as_,
            baseline,
            classification: classify(g, a, baseline),
        })
        .collect())
}

pub fn outcome_profile(problem: &Problem, policy: PolicyLabel) -> Result<OutcomeProfile, BridgeError> {
    Ok(outcome_profiles(problem)?.swap_remove(policy.index()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn classification_rule() {
        assert_eq!(classify(0.1, 0.8, 0.3), OutcomeClass::GoalInverting);
        assert_eq!(classify(0.1, 0.05, 0.3), OutcomeClass::Arbitrary);
        assert_eq!(classify(0.3, 0.6, 0.3), OutcomeClass::Arbitrary);
        assert_eq!(classify(0.9, 0.1, 0.3), OutcomeClass::GoalReaching);
        assert_eq!(classify(0.4, 0.5, 0.3), OutcomeClass::Arbitrary);
    }

    #[test]
    fn punitive_policy_inverts_the_goal() {
        let p = fixtures::war_on_drugs();
        let b = outcome_profile(&p, PolicyLabel::B).unwrap();
        assert!(b.p_antigoal_true > b.p_goal_true);
        assert_eq!(b.classification, OutcomeClass::GoalInverting);
        let a = outcome_profile(&p, PolicyLabel::A).unwrap();
        assert_eq!(a.classification, OutcomeClass::GoalReaching);
    }

    #[test]
    fn symmetric_problem_is_all_arbitrary() {
        let p = fixtures::symmetric(6);
        let profiles = outcome_profiles(&p).unwrap();
        for q in &profiles {
            assert_eq!(q.p_goal_true, profiles[0].p_goal_true);
            assert_eq!(q.classification, OutcomeClass::Arbitrary);
        }
    }

    #[test]
    fn absorbing_goal_entry_is_certain() {
        let p = fixtures::direct_goal();
        let a = outcome_profile(&p, PolicyLabel::A).unwrap();
        assert_eq!(a.p_goal_true, 1.0);
        assert_eq!(a.p_antigoal_true, 0.0);
        assert_eq!(a.classification, OutcomeClass::GoalReaching);
    }

    #[test]
    fn probabilities_are_probabilities() {
        for p in [fixtures::war_on_drugs(), fixtures::student()] {
            for q in outcome_profiles(&p).unwrap() {
                for x in [q.p_goal_true, q.p_antigoal_true, q.p_goal_subjective, q.p_antigoal_subjective] {
                    assert!((0.0..=1.0).contains(&x));
                }
                assert!(q.p_goal_true + q.p_antigoal_true <= 1.0 + 1e-12);
            }
        }
    }
}
