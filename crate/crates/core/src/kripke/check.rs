use serde::{Deserialize, Serialize};

use super::{Formula, KripkeError, KripkeFrame};

fn holds_at(frame: &KripkeFrame, world: usize, formula: &Formula) -> bool {
    match formula {
        // Atoms outside the valuation are false everywhere.
        Formula::Atom(a) => frame.holds(world, a),
        Formula::Not(f) => !holds_at(frame, world, f),
        Formula::And(a, b) => holds_at(frame, world, a) && holds_at(frame, world, b),
        Formula::Or(a, b) => holds_at(frame, world, a) || holds_at(frame, world, b),
        Formula::Implies(a, b) => !holds_at(frame, world, a) || holds_at(frame, world, b),
        Formula::Box(f) => frame.successors(world).iter().all(|&v| holds_at(frame, v, f)),
        Formula::Diamond(f) => frame.successors(world).iter().any(|&v| holds_at(frame, v, f)),
    }
}

/// Truth of `formula` at `world` under standard Kripke semantics.
pub fn eval_formula(frame: &KripkeFrame, world: &str, formula: &Formula) -> Result<bool, KripkeError> {
    Ok(holds_at(frame, frame.world_index(world)?, formula))
}

/// Same as [`eval_formula`] with a world index. Panics if out of range.
pub fn eval_at(frame: &KripkeFrame, world: usize, formula: &Formula) -> bool {
    holds_at(frame, world, formula)
}

/// Truth value at every world, in declaration order.
pub fn extension(frame: &KripkeFrame, formula: &Formula) -> Vec<bool> {
    (0..frame.len()).map(|w| holds_at(frame, w, formula)).collect()
}

/// `□(policy → goal)`: the untested belief that the policy necessarily reaches the goal.
pub fn relaxed_form(policy: &str, goal: &str) -> Formula {
    Formula::atom(policy).implies(Formula::atom(goal)).necessarily()
}

/// `¬□(policy → goal) ∧ ◇(policy → goal) ∧ ◇(policy → ¬goal)`.
pub fn probable_case(policy: &str, goal: &str) -> Formula {
    let reaches = || Formula::atom(policy).implies(Formula::atom(goal));
    let inverts = Formula::atom(policy).implies(Formula::atom(goal).not());
    reaches().necessarily().not().and(reaches().possibly()).and(inverts.possibly())
}

/// Successors of the evaluation world that certify each part of a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CcbWitnesses {
    /// Refutes `□(policy → goal)`: a successor where the policy holds and the goal fails.
    pub necessity_counterexample: Option<String>,
    /// Satisfies `policy → goal`, witnessing `◇(policy → goal)`.
    pub possibly_goal: Option<String>,
    /// Satisfies `policy → ¬goal`, witnessing `◇(policy → ¬goal)`.
    pub possibly_anti_goal: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcbVerdict {
    pub world: String,
    pub policy_atom: String,
    pub goal_atom: String,
    pub relaxed_claim_holds: bool,
    pub probable_case_holds: bool,
    pub witnesses: CcbWitnesses,
}

impl CcbVerdict {
    /// Re-evaluates every reported witness against `frame`.
    pub fn witnesses_sound(&self, frame: &KripkeFrame) -> Result<bool, KripkeError> {
        let reaches = Formula::atom(&self.policy_atom).implies(Formula::atom(&self.goal_atom));
        let inverts = Formula::atom(&self.policy_atom).implies(Formula::atom(&self.goal_atom).not());
        let origin = frame.world_index(&self.world)?;
        let check = |name: &Option<String>, f: &Formula, expect: bool| -> Result<bool, KripkeError> {
            match name {
                None => Ok(true),
                Some(w) => {
                    let v = frame.world_index(w)?;
                    Ok(frame.has_edge(origin, v) && eval_at(frame, v, f) == expect)
                }
            }
        };
        Ok(check(&self.witnesses.necessity_counterexample, &reaches, false)?
            && check(&self.witnesses.possibly_goal, &reaches, true)?
            && check(&self.witnesses.possibly_anti_goal, &inverts, true)?)
    }
}

/// Evaluates the relaxed claim and the probable-case conjunction at `world`.
///
/// The negated goal is the literal `¬goal`. Witnesses are the first matching
/// successors in declaration order.
pub fn detect_ccb(
    frame: &KripkeFrame,
    world: &str,
    policy_atom: &str,
    goal_atom: &str,
) -> Result<CcbVerdict, KripkeError> {
    let w = frame.world_index(world)?;
    let reaches = Formula::atom(policy_atom).implies(Formula::atom(goal_atom));
    let inverts = Formula::atom(policy_atom).implies(Formula::atom(goal_atom).not());
    let first = |f: &Formula, expect: bool| {
        frame
            .successors(w)
            .iter()
            .find(|&&v| eval_at(frame, v, f) == expect)
            .map(|&v| frame.world_name(v).to_string())
    };
    Ok(CcbVerdict {
        world: world.to_string(),
        policy_atom: policy_atom.to_string(),
        goal_atom: goal_atom.to_string(),
        relaxed_claim_holds: eval_at(frame, w, &relaxed_form(policy_atom, goal_atom)),
        probable_case_holds: eval_at(frame, w, &probable_case(policy_atom, goal_atom)),
        witnesses: CcbWitnesses {
            necessity_counterexample: first(&reaches, false),
            possibly_goal: first(&reaches, true),
            possibly_anti_goal: first(&inverts, true),
        },
    })
}

/// Which causal picture a frame encodes for a policy and goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Universe {
    /// The policy leads to the goal.
    Relaxed,
    /// The policy leads away from the goal.
    Empirical,
    /// Not taking the policy leads to the goal, taking it leads away.
    Corrected,
    Mixed,
}

/// Classifies a frame by one-step accessibility.
///
/// * policy worlds: satisfy the policy atom and have at least one successor;
/// * alternative worlds: falsify the policy atom, have at least one
///   successor, and are themselves accessible from some world (roots are the
///   starting situation, not an alternative course of action).
///
/// `Relaxed` needs some policy world and every policy world's successors to
/// satisfy the goal. `Corrected` needs every policy world's successors to
/// falsify the goal plus at least one alternative world, all of whose
/// successors satisfy the goal. `Empirical` needs some policy world with all
/// successors falsifying the goal when `Corrected` does not apply. Anything
/// else is `Mixed`.
pub fn classify_universe(frame: &KripkeFrame, policy_atom: &str, goal_atom: &str) -> Universe {
    let only = |w: usize, goal: bool| frame.successors(w).iter().all(|&v| frame.holds(v, goal_atom) == goal);
    let active = |w: usize| !frame.successors(w).is_empty();

    let policy: Vec<usize> =
        (0..frame.len()).filter(|&w| active(w) && frame.holds(w, policy_atom)).collect();
    let alternatives: Vec<usize> = (0..frame.len())
        .filter(|&w| active(w) && !frame.holds(w, policy_atom) && frame.has_predecessor(w))
        .collect();

    let policy_reaches_goal = policy.iter().all(|&w| only(w, true));
    let policy_misses_goal = policy.iter().all(|&w| only(w, false));

    if !policy.is_empty() && policy_reaches_goal {
        Universe::Relaxed
    } else if policy_misses_goal
        && !alternatives.is_empty()
        && alternatives.iter().all(|&w| only(w, true))
    {
        Universe::Corrected
    } else if !policy.is_empty() && policy_misses_goal {
        Universe::Empirical
    } else {
        Universe::Mixed
    }
}
