use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::WhmmError;

/// Tolerance on row and vector sums before exact renormalization.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;

/// Semantic tag of a state in a decision problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateRole {
    #[default]
    Plain,
    /// An outcome the decision maker wants to reach.
    Goal,
    /// The inverse of the goal: the outcome the decision maker wants to avoid.
    AntiGoal,
}

/// Ordered, labeled state space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    labels: Vec<String>,
    roles: Vec<StateRole>,
}

impl StateSpace {
    pub fn new(labels: Vec<String>, roles: Vec<StateRole>) -> Result<Self, WhmmError> {
        if labels.is_empty() {
            return Err(WhmmError::EmptyStateSpace);
        }
        if roles.len() != labels.len() {
            return Err(WhmmError::DimensionMismatch {
                what: "roles",
                expected: labels.len(),
                found: roles.len(),
            });
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for (index, label) in labels.iter().enumerate() {
            if label.trim().is_empty() {
                return Err(WhmmError::EmptyLabel { index });
            }
            if !seen.insert(label.as_str()) {
                return Err(WhmmError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { labels, roles })
    }

    /// All states plain, labeled `s0`, `s1`, ...
    pub fn plain(n: usize) -> Result<Self, WhmmError> {
        Self::new(
            (0..n).map(|i| format!("s{i}")).collect(),
            vec![StateRole::Plain; n],
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn role(&self, index: usize) -> StateRole {
        self.roles[index]
    }

    pub fn roles(&self) -> &[StateRole] {
        &self.roles
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Resolves a label, or a bare decimal index, to a state index.
    pub fn resolve(&self, name: &str) -> Result<usize, WhmmError> {
        if let Some(i) = self.index_of(name) {
            return Ok(i);
        }
        match name.parse::<usize>() {
            Ok(i) if i < self.len() => Ok(i),
            _ => Err(WhmmError::UnknownState(name.to_string())),
        }
    }

    pub fn with_role(&self, role: StateRole) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.roles[i] == role).collect()
    }

    pub fn goal_states(&self) -> Vec<usize> {
        self.with_role(StateRole::Goal)
    }

    pub fn anti_goal_states(&self) -> Vec<usize> {
        self.with_role(StateRole::AntiGoal)
    }
}

/// Square row-stochastic matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Validates the rows and renormalizes each one exactly by its sum.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, WhmmError> {
        let n = rows.len();
        if n == 0 {
            return Err(WhmmError::EmptyStateSpace);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(WhmmError::DimensionMismatch {
                    what: "transition row",
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(WhmmError::EntryOutOfRange { row: i, col: j, value });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(WhmmError::NotRowStochastic { row: i, sum });
            }
            entries.extend(row.iter().map(|v| v / sum));
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }

    /// Builds from rows that are already stochastic by construction.
    pub(crate) fn from_normalized(n: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.n + to]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "matrix dimensions differ");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Distribution of the first state of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDistribution(Vec<f64>);

impl InitialDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, WhmmError> {
        if probs.is_empty() {
            return Err(WhmmError::InvalidInitial("empty vector".into()));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(WhmmError::InvalidInitial(format!("entry {i} = {p} is outside [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
            return Err(WhmmError::InvalidInitial(format!("entries sum to {sum}")));
        }
        Ok(Self(probs.into_iter().map(|p| p / sum).collect()))
    }

    /// Point mass on `state`.
    pub fn point(n: usize, state: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[state] = 1.0;
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-state somatic multipliers: 1 is neutral, above 1 boosts, below 1 flattens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SomaticWeights(Vec<f64>);

impl TryFrom<Vec<f64>> for SomaticWeights {
    type Error = WhmmError;

    fn try_from(weights: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(weights)
    }
}

impl From<SomaticWeights> for Vec<f64> {
    fn from(w: SomaticWeights) -> Self {
        w.0
    }
}

impl SomaticWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self, WhmmError> {
        if let Some((index, &value)) =
            weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(WhmmError::NonPositiveWeight { index, value });
        }
        Ok(Self(weights))
    }

    pub fn neutral(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_neutral(&self) -> bool {
        self.0.iter().all(|&w| w == 1.0)
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, WhmmError> {
        Self::new(self.0.iter().map(|w| w * factor).collect())
    }
}

impl fmt::Display for SomaticWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "]")
    }
}

/// Which transition kernel an inference runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// The ground-truth matrix `A`.
    True,
    /// The weight-modulated matrix the decision maker believes in.
    Subjective,
}

impl Kernel {
    pub fn from_flag(subjective: bool) -> Self {
        if subjective {
            Kernel::Subjective
        } else {
            Kernel::True
        }
    }
}

/// A validated, immutable weighted Markov model.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMarkovModel {
    states: StateSpace,
    transitions: TransitionMatrix,
    initial: InitialDistribution,
    weights: SomaticWeights,
    effective: TransitionMatrix,
}

impl WeightedMarkovModel {
    pub fn new(
        states: StateSpace,
        transitions: TransitionMatrix,
        initial: InitialDistribution,
        weights: SomaticWeights,
    ) -> Result<Self, WhmmError> {
        let n = states.len();
        for (what, found) in [
            ("transition matrix", transitions.dim()),
            ("initial distribution", initial.len()),
            ("weights", weights.len()),
        ] {
            if found != n {
                return Err(WhmmError::DimensionMismatch { what, expected: n, found });
            }
        }
        let effective = modulate(&transitions, &weights)?;
        Ok(Self { states, transitions, initial, weights, effective })
    }

    /// Replaces the somatic overlay, keeping dynamics and initial distribution.
    pub fn with_weights(&self, weights: SomaticWeights) -> Result<Self, WhmmError> {
        Self::new(self.states.clone(), self.transitions.clone(), self.initial.clone(), weights)
    }

    /// Same model with every weight set to 1.
    pub fn neutral(&self) -> Self {
        Self {
            weights: SomaticWeights::neutral(self.n()),
            effective: self.transitions.clone(),
            ..self.clone()
        }
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn transitions(&self) -> &TransitionMatrix {
        &self.transitions
    }

    pub fn initial(&self) -> &InitialDistribution {
        &self.initial
    }

    pub fn weights(&self) -> &SomaticWeights {
        &self.weights
    }

    /// The weight-modulated matrix `ã_ij = a_ij w_j / Σ_k a_ik w_k`.
    pub fn apply_weights(&self) -> TransitionMatrix {
        self.effective.clone()
    }

    pub fn kernel(&self, kernel: Kernel) -> &TransitionMatrix {
        match kernel {
            Kernel::True => &self.transitions,
            Kernel::Subjective => &self.effective,
        }
    }

    pub(crate) fn check_state(&self, state: usize) -> Result<(), WhmmError> {
        if state < self.n() {
            Ok(())
        } else {
            Err(WhmmError::StateOutOfRange { state, n: self.n() })
        }
    }
}

/// Column modulation with row renormalization.
fn modulate(a: &TransitionMatrix, w: &SomaticWeights) -> Result<TransitionMatrix, WhmmError> {
    let n = a.dim();
    // Equal weights cancel exactly; skip the arithmetic so the result is bit-identical to A.
    let w = w.as_slice();
    if w.iter().all(|&x| x == w[0]) {
        return Ok(a.clone());
    }
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        let row = a.row(i);
        let denom: f64 = row.iter().zip(w).map(|(p, wj)| p * wj).sum();
        if !(denom.is_finite() && denom > 0.0) {
            return Err(WhmmError::DegenerateRow { row: i });
        }
        entries.extend(row.iter().zip(w).map(|(p, wj)| p * wj / denom));
    }
    Ok(TransitionMatrix::from_normalized(n, entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tm(rows: &[&[f64]]) -> TransitionMatrix {
        TransitionMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn model(rows: &[&[f64]], pi: &[f64], w: &[f64]) -> Result<WeightedMarkovModel, WhmmError> {
        let n = rows.len();
        WeightedMarkovModel::new(
            StateSpace::plain(n)?,
            TransitionMatrix::new(rows.iter().map(|r| r.to_vec()).collect())?,
            InitialDistribution::new(pi.to_vec())?,
            SomaticWeights::new(w.to_vec())?,
        )
    }

    #[test]
    fn identity_model_builds() {
        let m = model(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.apply_weights(), TransitionMatrix::identity(2));
    }

    #[test]
    fn row_sum_violation_names_row_and_sum() {
        let err = model(&[&[0.5, 0.4], &[0.2, 0.8]], &[1.0, 0.0], &[1.0, 1.0]).unwrap_err();
        match err {
            WhmmError::NotRowStochastic { row, sum } => {
                assert_eq!(row, 0);
                assert!((sum - 0.9).abs() < 1e-12);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(err.to_string().contains("row 0"));
    }

    #[test]
    fn zero_weight_is_rejected() {
        let err = model(
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]],
            &[1.0, 0.0, 0.0],
            &[1.0, 0.0, 1.0],
        )
        .unwrap_err();
        assert!(matches!(err, WhmmError::NonPositiveWeight { index: 1, .. }));
        assert!(SomaticWeights::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(SomaticWeights::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let err = WeightedMarkovModel::new(
            StateSpace::plain(2).unwrap(),
            TransitionMatrix::identity(2),
            InitialDistribution::new(vec![1.0, 0.0, 0.0]).unwrap(),
            SomaticWeights::neutral(2),
        )
        .unwrap_err();
        assert!(matches!(err, WhmmError::DimensionMismatch { expected: 2, found: 3, .. }));
        assert!(matches!(
            TransitionMatrix::new(vec![vec![1.0, 0.0], vec![1.0]]),
            Err(WhmmError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_initial() {
        assert!(matches!(
            InitialDistribution::new(vec![0.5, 0.4]),
            Err(WhmmError::InvalidInitial(_))
        ));
        assert!(matches!(
            InitialDistribution::new(vec![1.5, -0.5]),
            Err(WhmmError::InvalidInitial(_))
        ));
    }

    #[test]
    fn near_stochastic_rows_are_renormalized() {
        let m = tm(&[&[0.5 + 4e-10, 0.5], &[0.0, 1.0]]);
        let sum: f64 = m.row(0).iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn state_space_invariants() {
        assert!(matches!(StateSpace::new(vec![], vec![]), Err(WhmmError::EmptyStateSpace)));
        assert!(matches!(
            StateSpace::new(vec!["a".into(), "a".into()], vec![StateRole::Plain; 2]),
            Err(WhmmError::DuplicateLabel(_))
        ));
        assert!(matches!(
            StateSpace::new(vec!["a".into(), " ".into()], vec![StateRole::Plain; 2]),
            Err(WhmmError::EmptyLabel { index: 1 })
        ));
        let s = StateSpace::new(
            vec!["a".into(), "win".into(), "lose".into()],
            vec![StateRole::Plain, StateRole::Goal, StateRole::AntiGoal],
        )
        .unwrap();
        assert_eq!(s.goal_states(), vec![1]);
        assert_eq!(s.anti_goal_states(), vec![2]);
        assert_eq!(s.resolve("lose").unwrap(), 2);
        assert_eq!(s.resolve("0").unwrap(), 0);
        assert!(s.resolve("7").is_err());
    }

    #[test]
    fn neutral_weights_leave_a_unchanged() {
        let m = model(&[&[0.5, 0.5], &[0.5, 0.5]], &[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(m.apply_weights(), *m.transitions());
    }

    #[test]
    fn boost_renormalizes_rows() {
        let m = model(&[&[0.5, 0.5], &[0.5, 0.5]], &[1.0, 0.0], &[1.0, 3.0]).unwrap();
        let expected = tm(&[&[0.25, 0.75], &[0.25, 0.75]]);
        assert!(m.apply_weights().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn boost_on_asymmetric_rows() {
        // Exact rationals: row 0 = [9/11, 2/11], row 1 = [1/9, 8/9].
        let m = model(&[&[0.9, 0.1], &[0.2, 0.8]], &[1.0, 0.0], &[1.0, 2.0]).unwrap();
        let expected = tm(&[&[9.0 / 11.0, 2.0 / 11.0], &[1.0 / 9.0, 8.0 / 9.0]]);
        assert!(m.apply_weights().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn underflowing_weights_report_degenerate_row() {
        // 0.5 * 5e-324 rounds to zero.
        let err = model(
            &[&[0.0, 0.5, 0.5], &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]],
            &[1.0, 0.0, 0.0],
            &[1.0, 5e-324, 5e-324],
        )
        .unwrap_err();
        assert!(matches!(err, WhmmError::DegenerateRow { row: 0 }));
    }
}
