use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BridgeError;
use crate::whmm::io::ModelDocument;
use crate::whmm::{Kernel, SomaticWeights, StateRole, WeightedMarkovModel};

/// Prefix reserved for commitment worlds in compiled frames.
pub const COMMIT_PREFIX: &str = "commit:";

/// Canonical policy label. Display position is a presentation concern and
/// never changes the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyLabel {
    A,
    B,
    C,
    D,
}

impl PolicyLabel {
    pub const ALL: [PolicyLabel; 4] = [PolicyLabel::A, PolicyLabel::B, PolicyLabel::C, PolicyLabel::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyLabel::A => "A",
            PolicyLabel::B => "B",
            PolicyLabel::C => "C",
            PolicyLabel::D => "D",
        }
    }
}

impl fmt::Display for PolicyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for PolicyLabel {
    type Err = BridgeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" => Ok(PolicyLabel::A),
            "B" => Ok(PolicyLabel::B),
            "C" => Ok(PolicyLabel::C),
            "D" => Ok(PolicyLabel::D),
            other => Err(BridgeError::InvalidLabel(other.to_string())),
        }
    }
}

/// Authored ground truth about a policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyFlag {
    Correct,
    Inverse,
    Arbitrary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub label: PolicyLabel,
    pub text: String,
    pub first_action_state: usize,
    pub flag: PolicyFlag,
}

/// A four-policy decision problem over one weighted model.
///
/// The model's transition matrix is the ground truth; its weights are the
/// participant's somatic overlay. Goal and anti-goal states come from the
/// state roles and must be absorbing.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub id: String,
    pub description: String,
    pub goal_text: Option<String>,
    model: WeightedMarkovModel,
    current: usize,
    policies: Vec<Policy>,
    horizon: usize,
    goals: Vec<usize>,
    anti_goals: Vec<usize>,
}

impl Problem {
    pub fn new(
        id: impl Into<String>,
        description: impl Into<String>,
        model: WeightedMarkovModel,
        current: usize,
        mut policies: Vec<Policy>,
        horizon: usize,
    ) -> Result<Self, BridgeError> {
        if horizon == 0 {
            return Err(BridgeError::HorizonZero);
        }
        let n = model.n();
        if current >= n {
            return Err(BridgeError::UnknownState(current.to_string()));
        }
        let pi = model.initial().probs()[current];
        if (pi - 1.0).abs() > 1e-9 {
            return Err(BridgeError::CurrentNotCertain { state: model.states().label(current).into(), mass: pi });
        }
        if policies.len() != 4 {
            return Err(BridgeError::PolicyCount(policies.len()));
        }
        policies.sort_by_key(|p| p.label);
        for pair in policies.windows(2) {
            if pair[0].label == pair[1].label {
                return Err(BridgeError::DuplicatePolicy(pair[0].label));
            }
        }
        for (flag, expected) in [(PolicyFlag::Correct, 1), (PolicyFlag::Inverse, 1), (PolicyFlag::Arbitrary, 2)] {
            let found = policies.iter().filter(|p| p.flag == flag).count();
            if found != expected {
                return Err(BridgeError::FlagCount { flag, expected, found });
            }
        }
        let a = model.transitions();
        for p in &policies {
            if p.first_action_state >= n {
                return Err(BridgeError::UnknownState(p.first_action_state.to_string()));
            }
            if a.get(current, p.first_action_state) <= 0.0 {
                return Err(BridgeError::UnreachableFirstAction {
                    policy: p.label,
                    state: model.states().label(p.first_action_state).into(),
                });
            }
        }
        let states = model.states();
        if let Some(l) = states.labels().iter().find(|l| l.starts_with(COMMIT_PREFIX)) {
            return Err(BridgeError::ReservedLabel(l.clone()));
        }
        let goals = states.goal_states();
        let anti_goals = states.anti_goal_states();
        if goals.is_empty() {
            return Err(BridgeError::NoGoalState);
        }
        for &s in goals.iter().chain(&anti_goals) {
            if a.get(s, s) != 1.0 {
                return Err(BridgeError::OutcomeNotAbsorbing(states.label(s).into()));
            }
        }
        Ok(Self {
            id: id.into(),
            description: description.into(),
            goal_text: None,
            model,
            current,
            policies,
            horizon,
            goals,
            anti_goals,
        })
    }

    pub fn model(&self) -> &WeightedMarkovModel {
        &self.model
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn current_label(&self) -> &str {
        self.model.states().label(self.current)
    }

    /// Policies ordered by label.
    pub fn policies(&self) -> &[Policy] {
        &self.policies
    }

    pub fn policy(&self, label: PolicyLabel) -> &Policy {
        &self.policies[label.index()]
    }

    pub fn policy_with_flag(&self, flag: PolicyFlag) -> &Policy {
        self.policies.iter().find(|p| p.flag == flag).expect("flag counts validated")
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn goal_states(&self) -> &[usize] {
        &self.goals
    }

    pub fn anti_goal_states(&self) -> &[usize] {
        &self.anti_goals
    }

    pub fn state_label(&self, state: usize) -> &str {
        self.model.states().label(state)
    }

    pub fn role(&self, state: usize) -> StateRole {
        self.model.states().role(state)
    }

    /// The same problem seen through a different somatic overlay.
    pub fn with_weights(&self, weights: SomaticWeights) -> Result<Self, BridgeError> {
        Ok(Self { model: self.model.with_weights(weights)?, ..self.clone() })
    }

    pub fn with_goal_text(mut self, text: Option<String>) -> Self {
        self.goal_text = text;
        self
    }

    pub(crate) fn kernel_matrix(&self, kernel: Kernel) -> &crate::whmm::TransitionMatrix {
        self.model.kernel(kernel)
    }
}

/// JSON problem document. States are referenced by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub id: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_text: Option<String>,
    pub current: String,
    pub model: ModelDocument,
    pub policies: Vec<PolicyDocument>,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDocument {
    pub label: PolicyLabel,
    pub text: String,
    pub first_action_state: String,
    pub flag: PolicyFlag,
}

impl ProblemDocument {
    pub fn build(&self) -> Result<Problem, BridgeError> {
        let model = self.model.build()?;
        let resolve = |name: &str| {
            model.states().index_of(name).ok_or_else(|| BridgeError::UnknownState(name.to_string()))
        };
        let current = resolve(&self.current)?;
        let policies = self
            .policies
            .iter()
            .map(|p| {
                Ok(Policy {
                    label: p.label,
                    text: p.text.clone(),
                    first_action_state: resolve(&p.first_action_state)?,
                    flag: p.flag,
                })
            })
            .collect::<Result<Vec<_>, BridgeError>>()?;
        Ok(Problem::new(&self.id, &self.description, model, current, policies, self.horizon)?
            .with_goal_text(self.goal_text.clone()))
    }
}

impl From<&Problem> for ProblemDocument {
    fn from(p: &Problem) -> Self {
        Self {
            id: p.id.clone(),
            description: p.description.clone(),
            goal_text: p.goal_text.clone(),
            current: p.current_label().to_string(),
            model: ModelDocument::from(p.model()),
            policies: p
                .policies
                .iter()
                .map(|q| PolicyDocument {
                    label: q.label,
                    text: q.text.clone(),
                    first_action_state: p.state_label(q.first_action_state).to_string(),
                    flag: q.flag,
                })
                .collect(),
            horizon: p.horizon,
        }
    }
}

impl FromStr for Problem {
    type Err = BridgeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let doc: ProblemDocument = serde_json::from_str(s).map_err(|e| BridgeError::Json(e.to_string()))?;
        doc.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn labels_parse() {
        assert_eq!("C".parse::<PolicyLabel>().unwrap(), PolicyLabel::C);
        assert_eq!("E".parse::<PolicyLabel>(), Err(BridgeError::InvalidLabel("E".into())));
        assert_eq!(serde_json::to_string(&PolicyLabel::D).unwrap(), "\"D\"");
    }

    #[test]
    fn bundled_problems_validate() {
        let p = fixtures::war_on_drugs();
        assert_eq!(p.policy(PolicyLabel::B).flag, PolicyFlag::Inverse);
        assert_eq!(p.current_label(), "Drug abuse in society");
        let s = fixtures::student();
        assert_eq!(s.policy_with_flag(PolicyFlag::Inverse).label, PolicyLabel::A);
    }

    #[test]
    fn document_round_trip() {
        let p = fixtures::war_on_drugs();
        let doc = ProblemDocument::from(&p);
        assert_eq!(doc.build().unwrap(), p);
    }

    fn doc() -> ProblemDocument {
        ProblemDocument::from(&fixtures::war_on_drugs())
    }

    #[test]
    fn validation_errors() {
        let mut d = doc();
        d.policies[3].flag = PolicyFlag::Correct;
        assert!(matches!(d.build(), Err(BridgeError::FlagCount { flag: PolicyFlag::Correct, found: 2, .. })));

        let mut d = doc();
        d.policies.pop();
        assert_eq!(d.build(), Err(BridgeError::PolicyCount(3)));

        let mut d = doc();
        d.policies[1].label = PolicyLabel::A;
        assert_eq!(d.build(), Err(BridgeError::DuplicatePolicy(PolicyLabel::A)));

        let mut d = doc();
        d.policies[0].first_action_state = "Dealers arrested".into();
        assert!(matches!(d.build(), Err(BridgeError::UnreachableFirstAction { policy: PolicyLabel::A, .. })));

        let mut d = doc();
        d.model.initial = vec![0.5, 0.5].into_iter().chain(std::iter::repeat(0.0).take(10)).collect();
        assert!(matches!(d.build(), Err(BridgeError::CurrentNotCertain { .. })));

        let mut d = doc();
        d.current = "Nowhere".into();
        assert_eq!(d.build(), Err(BridgeError::UnknownState("Nowhere".into())));

        let mut d = doc();
        d.horizon = 0;
        assert_eq!(d.build(), Err(BridgeError::HorizonZero));

        let mut d = doc();
        d.model.states[9].label = "commit:x".into();
        assert_eq!(d.build(), Err(BridgeError::ReservedLabel("commit:x".into())));

        let mut d = doc();
        d.model.transitions[10] = d.model.transitions[9].clone();
        assert!(matches!(d.build(), Err(BridgeError::OutcomeNotAbsorbing(_))));
    }

    #[test]
    fn malformed_json_is_reported() {
        assert!(matches!("{".parse::<Problem>(), Err(BridgeError::Json(_))));
    }
}
