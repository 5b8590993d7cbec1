//! Bundled problems and frames.
//!
//! The JSON files live in the repository's `fixtures/` directory and are
//! embedded at compile time. All transition numbers are authored for this
//! repository; the programmatic problems below exist for tests and demos.

use crate::bridge::{Policy, PolicyFlag, PolicyLabel, Problem};
use crate::kripke::{FrameDocument, KripkeFrame};
use crate::whmm::{InitialDistribution, SomaticWeights, StateRole, StateSpace, TransitionMatrix, WeightedMarkovModel};

pub const WAR_ON_DRUGS_PROBLEM: &str = include_str!("../../../fixtures/war_on_drugs.problem.json");
pub const STUDENT_PROBLEM: &str = include_str!("../../../fixtures/student.problem.json");
pub const THREE_WORLDS_FRAME: &str = include_str!("../../../fixtures/three_worlds.json");
pub const WAR_ON_DRUGS_RELAXED: &str = include_str!("../../../fixtures/war_on_drugs.relaxed.json");
pub const WAR_ON_DRUGS_EMPIRICAL: &str = include_str!("../../../fixtures/war_on_drugs.empirical.json");
pub const WAR_ON_DRUGS_CORRECTED: &str = include_str!("../../../fixtures/war_on_drugs.corrected.json");

fn frame(json: &str) -> KripkeFrame {
    serde_json::from_str::<FrameDocument>(json).expect("bundled frame parses").build().expect("bundled frame is valid")
}

pub fn war_on_drugs() -> Problem {
    WAR_ON_DRUGS_PROBLEM.parse().expect("bundled problem is valid")
}

pub fn student() -> Problem {
    STUDENT_PROBLEM.parse().expect("bundled problem is valid")
}

pub fn three_worlds() -> KripkeFrame {
    frame(THREE_WORLDS_FRAME)
}

/// `(relaxed, empirical, corrected)` war-on-drugs frames.
pub fn war_on_drugs_frames() -> (KripkeFrame, KripkeFrame, KripkeFrame) {
    (frame(WAR_ON_DRUGS_RELAXED), frame(WAR_ON_DRUGS_EMPIRICAL), frame(WAR_ON_DRUGS_CORRECTED))
}

/// Every bundled problem, keyed by id.
pub fn bundled_problems() -> Vec<Problem> {
    vec![student(), war_on_drugs()]
}

fn policies(firsts: [usize; 4]) -> Vec<Policy> {
    let flags = [PolicyFlag::Correct, PolicyFlag::Inverse, PolicyFlag::Arbitrary, PolicyFlag::Arbitrary];
    PolicyLabel::ALL
        .iter()
        .zip(firsts)
        .zip(flags)
        .map(|((&label, first), flag)| Policy {
            label,
            text: format!("Policy {label}"),
            first_action_state: first,
            flag,
        })
        .collect()
}

fn build(labels: &[&str], roles: &[StateRole], rows: Vec<Vec<f64>>) -> WeightedMarkovModel {
    let n = labels.len();
    WeightedMarkovModel::new(
        StateSpace::new(labels.iter().map(|s| s.to_string()).collect(), roles.to_vec()).unwrap(),
        TransitionMatrix::new(rows).unwrap(),
        InitialDistribution::point(n, 0),
        SomaticWeights::neutral(n),
    )
    .unwrap()
}

/// Four policies whose first action states have identical rows, so every
/// policy has the same reach probabilities under any neutral overlay. The
/// flags are nominal.
pub fn symmetric(horizon: usize) -> Problem {
    use StateRole::*;
    let labels = ["start", "p1", "p2", "p3", "p4", "stalled", "goal", "anti_goal"];
    let roles = [Plain, Plain, Plain, Plain, Plain, Plain, Goal, AntiGoal];
    let mut rows = vec![vec![0.0; 8]; 8];
    rows[0][1..5].fill(0.25);
    for row in &mut rows[1..5] {
        row[5] = 0.4;
        row[6] = 0.3;
        row[7] = 0.3;
    }
    for s in 5..8 {
        rows[s][s] = 1.0;
    }
    Problem::new("symmetric", "Four interchangeable policies.", build(&labels, &roles, rows), 0, policies([1, 2, 3, 4]), horizon)
        .unwrap()
}

/// Policy A enters an absorbing goal state directly; policy B walks into a trap.
pub fn direct_goal() -> Problem {
    use StateRole::*;
    let labels = ["start", "goal", "trap", "detour", "drift", "stalled", "anti_goal"];
    let roles = [Plain, Goal, Plain, Plain, Plain, Plain, AntiGoal];
    let rows = vec![
        vec![0.0, 0.25, 0.25, 0.25, 0.25, 0.0, 0.0],
        vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.8],
        vec![0.0, 0.3, 0.0, 0.0, 0.0, 0.5, 0.2],
        vec![0.0, 0.3, 0.0, 0.0, 0.0, 0.5, 0.2],
        vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    ];
    Problem::new("direct_goal", "One policy reaches the goal at once.", build(&labels, &roles, rows), 0, policies([1, 2, 3, 4]), 4)
        .unwrap()
}
