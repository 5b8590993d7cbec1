use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::{ChoiceRecord, Source};
use super::ExperimentError;
use crate::bridge::{policy_reach, PolicyLabel, Problem};
use crate::whmm::{draw_index, Kernel, SomaticWeights};

/// A simulated participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub weights: SomaticWeights,
    /// Choice sharpness; 1 is probability matching, large values approach argmax.
    pub gamma: f64,
    pub seed: u64,
}

impl AgentConfig {
    pub fn new(weights: SomaticWeights, gamma: f64, seed: u64) -> Result<Self, ExperimentError> {
        check_gamma(gamma)?;
        Ok(Self { weights, gamma, seed })
    }

    /// An agent that sees the problem through its own somatic overlay.
    pub fn for_problem(problem: &Problem, gamma: f64, seed: u64) -> Result<Self, ExperimentError> {
        Self::new(problem.model().weights().clone(), gamma, seed)
    }
}

fn check_gamma(gamma: f64) -> Result<(), ExperimentError> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(ExperimentError::InvalidGamma(gamma))
    }
}

/// Normalizes `score_i ^ gamma`. All-zero scores give the uniform distribution.
pub fn distribution_from_scores(scores: [f64; 4], gamma: f64) -> Result<[f64; 4], ExperimentError> {
    check_gamma(gamma)?;
    if let Some(&bad) = scores.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(ExperimentError::InvalidScore(bad));
    }
    if scores.iter().all(|&s| s == 0.0) {
        return Ok([0.25; 4]);
    }
    // Powers are taken in log space so large gamma cannot overflow.
    let logs = scores.map(|s| if s > 0.0 { gamma * s.ln() } else { f64::NEG_INFINITY });
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw = logs.map(|l| (l - top).exp());
    let total: f64 = raw.iter().sum();
    Ok(raw.map(|x| x / total))
}

/// Subjective goal probabilities of the four policies under the agent's overlay.
pub fn subjective_scores(problem: &Problem, weights: &SomaticWeights) -> Result<[f64; 4], ExperimentError> {
    let seen = problem.with_weights(weights.clone())?;
    let mut scores = [0.0; 4];
    for label in PolicyLabel::ALL {
        scores[label.index()] = policy_reach(&seen, label, Kernel::Subjective)?.0;
    }
    Ok(scores)
}

/// Choice probabilities over policies A..D.
pub fn choice_distribution(problem: &Problem, agent: &AgentConfig) -> Result<[f64; 4], ExperimentError> {
    distribution_from_scores(subjective_scores(problem, &agent.weights)?, agent.gamma)
}

/// The `index`-th output of a SplitMix64 generator seeded with `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One draw from `distribution` using a generator seeded with `seed`.
pub fn draw_choice(distribution: &[f64; 4], seed: u64) -> PolicyLabel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PolicyLabel::ALL[draw_index(distribution, &mut rng)]
}

/// Simulated timestamps are synthetic: agent `i` enters its phases at
/// `10i`, `10i + 1` and `10i + 2` ms and answers immediately.
pub const SIMULATED_PHASE_SPACING_MS: u64 = 10;

pub fn simulated_cohort_id(problem_id: &str, master_seed: u64, n: usize) -> String {
    format!("sim:{problem_id}:{master_seed}:{n}")
}

/// Runs `n` agents cloned from `template`, agent `i` seeded with
/// `derive_seed(master_seed, i)`. Records come back in agent order.
pub fn run_cohort(
    problem: &Problem,
    template: &AgentConfig,
    n: usize,
    master_seed: u64,
) -> Result<Vec<ChoiceRecord>, ExperimentError> {
    if n == 0 {
        return Err(ExperimentError::EmptyCohort);
    }
    let distribution = choice_distribution(problem, template)?;
    let cohort_id = simulated_cohort_id(&problem.id, master_seed, n);
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| {
            let base = i * SIMULATED_PHASE_SPACING_MS;
            ChoiceRecord {
                problem_id: problem.id.clone(),
                subject_id: format!("agent-{i}"),
                cohort_id: cohort_id.clone(),
                phase_timestamps: [base, base + 1, base + 2],
                chosen: draw_choice(&distribution, derive_seed(master_seed, i)),
                latency_ms: 0,
                source: Source::Simulated,
                session_id: None,
                occupation: None,
                education: None,
            }
        })
        .collect())
}
