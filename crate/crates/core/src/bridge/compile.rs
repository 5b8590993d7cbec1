use std::collections::BTreeSet;

use super::{PolicyLabel, Problem, COMMIT_PREFIX};
use crate::kripke::KripkeFrame;
use crate::whmm::{Kernel, StateRole, WeightedMarkovModel};

pub const GOAL_ATOM: &str = "goal";
pub const ANTI_GOAL_ATOM: &str = "anti_goal";

pub fn commit_world(label: PolicyLabel) -> String {
    format!("{COMMIT_PREFIX}{label}")
}

pub fn policy_atom(label: PolicyLabel) -> String {
    format!("policy_{label}")
}

fn role_atoms(role: StateRole) -> BTreeSet<String> {
    match role {
        StateRole::Goal => BTreeSet::from([GOAL_ATOM.to_string()]),
        StateRole::AntiGoal => BTreeSet::from([ANTI_GOAL_ATOM.to_string()]),
        StateRole::Plain => BTreeSet::new(),
    }
}

fn threshold_edges(model: &WeightedMarkovModel, theta: f64) -> Vec<(usize, usize)> {
    let a = model.kernel(Kernel::True);
    let n = model.n();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| a.get(i, j) > theta).collect()
}

/// One world per state, an edge wherever the true probability exceeds `theta`,
/// and the role atoms `goal` / `anti_goal`.
pub fn state_frame(model: &WeightedMarkovModel, theta: f64) -> KripkeFrame {
    let states = model.states();
    KripkeFrame::from_parts(
        states.labels().to_vec(),
        &threshold_edges(model, theta),
        states.roles().iter().map(|&r| role_atoms(r)).collect(),
    )
    .expect("state labels are unique and non-empty")
}

/// Compiles a problem into a frame.
///
/// Worlds are the model states followed by `commit:A` .. `commit:D`. State
/// edges keep every true transition above `theta`; the current state reaches
/// each commitment world, and each commitment world reaches its policy's
/// first action state. Commitment worlds carry `policy_X`.
pub fn whmm_to_kripke(problem: &Problem, theta: f64) -> KripkeFrame {
    let model = problem.model();
    let n = model.n();
    let states = model.states();
    let mut worlds = states.labels().to_vec();
    let mut valuation: Vec<BTreeSet<String>> = states.roles().iter().map(|&r| role_atoms(r)).collect();
    let mut edges = threshold_edges(model, theta);
    for (k, policy) in problem.policies().iter().enumerate() {
        worlds.push(commit_world(policy.label));
        valuation.push(BTreeSet::from([policy_atom(policy.label)]));
        edges.push((problem.current(), n + k));
        edges.push((n + k, policy.first_action_state));
    }
    KripkeFrame::from_parts(worlds, &edges, valuation).expect("problem validation reserves commitment names")
}

/// States where a walk of at most `horizon` steps from the policy's first
/// action state can stop: the first goal or anti-goal state it enters, a
/// state without outgoing edges above `theta`, or wherever it stands after
/// `horizon` steps. Returned in state order.
pub fn bounded_outcomes(problem: &Problem, label: PolicyLabel, theta: f64) -> Vec<usize> {
    let a = problem.kernel_matrix(Kernel::True);
    let n = problem.model().n();
    let outcome = |s: usize| problem.role(s) != StateRole::Plain;
    let start = problem.policy(label).first_action_state;

    let mut ends = BTreeSet::new();
    let mut frontier: BTreeSet<usize> = BTreeSet::from([start]);
    for step in 0..=problem.horizon() {
        let mut next = BTreeSet::new();
        for &s in &frontier {
            if outcome(s) || step == problem.horizon() {
                ends.insert(s);
                continue;
            }
            let succ: Vec<usize> = (0..n).filter(|&j| a.get(s, j) > theta).collect();
            if succ.is_empty() {
                ends.insert(s);
            }
            next.extend(succ);
        }
        frontier = next;
    }
    ends.into_iter().collect()
}

/// Bounded unrolling of one policy: the commitment world sees every possible
/// stopping state of the policy (see [`bounded_outcomes`]). Outcome worlds
/// carry `policy_X` plus their role atom, so `□(policy_X → goal)` at the
/// commitment world reads "every course of this policy ends at the goal".
pub fn outcome_frame(problem: &Problem, label: PolicyLabel, theta: f64) -> KripkeFrame {
    let ends = bounded_outcomes(problem, label, theta);
    let atom = policy_atom(label);
    let mut worlds = vec![commit_world(label)];
    let mut valuation = vec![BTreeSet::from([atom.clone()])];
    for &s in &ends {
        worlds.push(problem.state_label(s).to_string());
        let mut atoms = role_atoms(problem.role(s));
        atoms.insert(atom.clone());
        valuation.push(atoms);
    }
    let edges: Vec<(usize, usize)> = (1..worlds.len()).map(|k| (0, k)).collect();
    KripkeFrame::from_parts(worlds, &edges, valuation).expect("outcome states are distinct")
}
