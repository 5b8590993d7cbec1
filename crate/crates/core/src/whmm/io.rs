//! JSON model documents.
//!
//! ```json
//! {
//!   "states": [{"label": "start", "role": "plain"}, {"label": "done", "role": "goal"}],
//!   "transitions": [[0.9, 0.1], [0.0, 1.0]],
//!   "initial": [1.0, 0.0],
//!   "weights": [1.0, 2.0]
//! }
//! ```
//!
//! `role` is one of `plain` (default), `goal`, `anti_goal`. `weights` may be
//! omitted for neutral weights. Unknown fields are rejected.

use serde::{Deserialize, Serialize};

use super::{
    InitialDistribution, SomaticWeights, StateRole, StateSpace, TransitionMatrix,
    WeightedMarkovModel, WhmmError,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub label: String,
    #[serde(default)]
    pub role: StateRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub states: Vec<StateEntry>,
    pub transitions: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl ModelDocument {
    pub fn build(&self) -> Result<WeightedMarkovModel, WhmmError> {
        let states = StateSpace::new(
            self.states.iter().map(|s| s.label.clone()).collect(),
            self.states.iter().map(|s| s.role).collect(),
        )?;
        let n = states.len();
        let weights = match &self.weights {
            Some(w) => SomaticWeights::new(w.clone())?,
            None => SomaticWeights::neutral(n),
        };
        WeightedMarkovModel::new(
            states,
            TransitionMatrix::new(self.transitions.clone())?,
            InitialDistribution::new(self.initial.clone())?,
            weights,
        )
    }
}

impl From<&WeightedMarkovModel> for ModelDocument {
    fn from(model: &WeightedMarkovModel) -> Self {
        let states = model.states();
        Self {
            states: (0..states.len())
                .map(|i| StateEntry { label: states.label(i).to_string(), role: states.role(i) })
                .collect(),
            transitions: model.transitions().to_rows(),
            initial: model.initial().probs().to_vec(),
            weights: Some(model.weights().as_slice().to_vec()),
        }
    }
}
