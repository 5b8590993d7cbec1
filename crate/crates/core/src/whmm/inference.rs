use super::{Kernel, LogProb, Trajectory, WeightedMarkovModel, WhmmError};

/// Log-probability of a fully observed state path:
/// `log π_{s0} + Σ_t log M_{s_t, s_{t+1}}`, accumulated left to right.
pub fn forward_likelihood(
    model: &WeightedMarkovModel,
    path: &Trajectory,
    kernel: Kernel,
) -> Result<LogProb, WhmmError> {
    path.check(model)?;
    let states = path.states();
    let m = model.kernel(kernel);
    let mut acc = model.initial().probs()[states[0]].ln();
    for w in states.windows(2) {
        acc += m.get(w[0], w[1]).ln();
    }
    Ok(if acc == f64::NEG_INFINITY || acc.is_nan() {
        LogProb::ZERO
    } else {
        LogProb(acc)
    })
}

/// Probability that a chain started at `from` enters any of `targets` within
/// `horizon` steps. Targets are absorbing for the computation.
pub fn reach_probability(
    model: &WeightedMarkovModel,
    from: usize,
    targets: &[usize],
    horizon: usize,
    kernel: Kernel,
) -> Result<f64, WhmmError> {
    if targets.is_empty() {
        return Err(WhmmError::EmptyTargetSet);
    }
    if horizon == 0 {
        return Err(WhmmError::HorizonZero);
    }
    model.check_state(from)?;
    let n = model.n();
    let mut is_target = vec![false; n];
    for &t in targets {
        model.check_state(t)?;
        is_target[t] = true;
    }
    if is_target[from] {
        return Ok(1.0);
    }

    let m = model.kernel(kernel);
    // Mass still wandering among non-target states.
    let mut live = vec![0.0; n];
    live[from] = 1.0;
    let mut next = vec![0.0; n];
    let mut hit = 0.0;
    for _ in 0..horizon {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, &mass) in live.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (j, &p) in m.row(i).iter().enumerate() {
                next[j] += mass * p;
            }
        }
        for j in 0..n {
            if is_target[j] {
                hit += next[j];
                next[j] = 0.0;
            }
        }
        std::mem::swap(&mut live, &mut next);
    }
    Ok(hit.clamp(0.0, 1.0))
}

/// Most probable path from one state to another.
#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiPath {
    pub path: Trajectory,
    pub log_prob: LogProb,
}

/// Tolerance under which two path log-probabilities count as tied.
fn tie_tolerance(best: f64) -> f64 {
    1e-12 * best.abs().max(1.0)
}

/// Maximum-probability path of at most `horizon` steps from `from` that ends in `to`.
///
/// Among paths whose log-probability is within a 1e-12 relative band of the
/// optimum, the lexicographically smallest index sequence wins; a proper
/// prefix sorts before its extensions, so the zero-step path `[from]` is
/// returned whenever `from == to`.
///
/// Runs a backward pass for the best completion value from every state with
/// every remaining step budget, then builds the answer greedily front to back.
pub fn viterbi_decode(
    model: &WeightedMarkovModel,
    from: usize,
    to: usize,
    horizon: usize,
    kernel: Kernel,
) -> Result<ViterbiPath, WhmmError> {
    if horizon == 0 {
        return Err(WhmmError::HorizonZero);
    }
    model.check_state(from)?;
    model.check_state(to)?;
    let n = model.n();
    let m = model.kernel(kernel);
    let log_m: Vec<f64> = (0..n).flat_map(|i| m.row(i).iter().map(|p| p.ln())).collect();

    // best[r][s]: best log-prob of reaching `to` from `s` in at most r steps.
    let mut best = vec![vec![f64::NEG_INFINITY; n]; horizon + 1];
    best[0][to] = 0.0;
    for r in 1..=horizon {
        for s in 0..n {
            let mut value = if s == to { 0.0 } else { f64::NEG_INFINITY };
            for k in 0..n {
                let cand = log_m[s * n + k] + best[r - 1][k];
                if cand > value {
                    value = cand;
                }
            }
            best[r][s] = value;
        }
    }

    let optimum = best[horizon][from];
    if optimum == f64::NEG_INFINITY {
        return Err(WhmmError::NoPath { from, to, horizon });
    }
    let floor = optimum - tie_tolerance(optimum);

    let mut path = vec![from];
    let mut acc = 0.0;
    let mut current = from;
    for remaining in (0..=horizon).rev() {
        if current == to && acc >= floor {
            break;
        }
        if remaining == 0 {
            break;
        }
        let step = (0..n).find(|&k| {
            let lp = log_m[current * n + k];
            lp > f64::NEG_INFINITY && acc + lp + best[remaining - 1][k] >= floor
        });
        match step {
            Some(k) => {
                acc += log_m[current * n + k];
                path.push(k);
                current = k;
            }
            None => break,
        }
    }
    debug_assert_eq!(current, to, "greedy reconstruction left the optimal band");
    if current != to {
        return Err(WhmmError::NoPath { from, to, horizon });
    }
    Ok(ViterbiPath { path: Trajectory(path), log_prob: LogProb(acc) })
}

#[cfg(test)]
mod tests {
    use super::super::{InitialDistribution, SomaticWeights, StateSpace, TransitionMatrix};
    use super::*;

    fn model(rows: &[&[f64]], pi: &[f64], w: &[f64]) -> WeightedMarkovModel {
        WeightedMarkovModel::new(
            StateSpace::plain(rows.len()).unwrap(),
            TransitionMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap(),
            InitialDistribution::new(pi.to_vec()).unwrap(),
            SomaticWeights::new(w.to_vec()).unwrap(),
        )
        .unwrap()
    }

    fn path(states: &[usize]) -> Trajectory {
        Trajectory::new(states.to_vec()).unwrap()
    }

    #[test]
    fn likelihood_of_absorbing_certainty() {
        let m = model(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 0.0], &[1.0, 1.0]);
        for kernel in [Kernel::True, Kernel::Subjective] {
            assert_eq!(forward_likelihood(&m, &path(&[0, 0, 0]), kernel).unwrap(), LogProb(0.0));
        }
    }

    #[test]
    fn likelihood_products() {
        let m = model(&[&[0.5, 0.5], &[0.5, 0.5]], &[1.0, 0.0], &[1.0, 1.0]);
        let lp = forward_likelihood(&m, &path(&[0, 1, 0]), Kernel::True).unwrap();
        assert!((lp.0 - 0.25f64.ln()).abs() < 1e-15);

        let boosted = m.with_weights(SomaticWeights::new(vec![1.0, 3.0]).unwrap()).unwrap();
        let lp = forward_likelihood(&boosted, &path(&[0, 1]), Kernel::Subjective).unwrap();
        assert!((lp.0 - 0.75f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_path_is_neg_infinity() {
        let m = model(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 0.0], &[1.0, 1.0]);
        assert!(forward_likelihood(&m, &path(&[0, 1]), Kernel::True).unwrap().is_zero());
        assert!(forward_likelihood(&m, &path(&[1]), Kernel::True).unwrap().is_zero());
    }

    #[test]
    fn likelihood_rejects_out_of_range_state() {
        let m = model(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 0.0], &[1.0, 1.0]);
        assert!(matches!(
            forward_likelihood(&m, &path(&[0, 2]), Kernel::True),
            Err(WhmmError::PathStateOutOfRange { position: 1, state: 2, n: 2 })
        ));
    }

    #[test]
    fn reach_from_target_is_certain() {
        let m = model(&[&[0.9, 0.1], &[0.0, 1.0]], &[1.0, 0.0], &[1.0, 1.0]);
        for t in 1..5 {
            assert_eq!(reach_probability(&m, 1, &[1], t, Kernel::True).unwrap(), 1.0);
        }
    }

    #[test]
    fn reach_within_two_steps() {
        let m = model(&[&[0.9, 0.1], &[0.0, 1.0]], &[1.0, 0.0], &[1.0, 2.0]);
        let truth = reach_probability(&m, 0, &[1], 2, Kernel::True).unwrap();
        assert!((truth - 0.19).abs() < 1e-15);
        let subjective = reach_probability(&m, 0, &[1], 2, Kernel::Subjective).unwrap();
        assert!((subjective - 40.0 / 121.0).abs() < 1e-15);
    }

    #[test]
    fn reach_errors() {
        let m = model(&[&[0.9, 0.1], &[0.0, 1.0]], &[1.0, 0.0], &[1.0, 1.0]);
        assert_eq!(reach_probability(&m, 0, &[], 2, Kernel::True), Err(WhmmError::EmptyTargetSet));
        assert_eq!(reach_probability(&m, 0, &[1], 0, Kernel::True), Err(WhmmError::HorizonZero));
        assert!(reach_probability(&m, 0, &[5], 1, Kernel::True).is_err());
    }

    #[test]
    fn viterbi_prefers_zero_step_path() {
        let m = model(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 0.0], &[1.0, 1.0]);
        let v = viterbi_decode(&m, 0, 0, 3, Kernel::True).unwrap();
        assert_eq!(v.path.states(), &[0]);
        assert_eq!(v.log_prob, LogProb(0.0));
    }

    #[test]
    fn viterbi_direct_jump() {
        let m = model(&[&[0.9, 0.1], &[0.0, 1.0]], &[1.0, 0.0], &[1.0, 1.0]);
        let v = viterbi_decode(&m, 0, 1, 3, Kernel::True).unwrap();
        assert_eq!(v.path.states(), &[0, 1]);
        assert!((v.log_prob.0 - 0.1f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn viterbi_flip_flop() {
        let m = model(&[&[0.0, 1.0], &[1.0, 0.0]], &[1.0, 0.0], &[1.0, 1.0]);
        let v = viterbi_decode(&m, 0, 0, 1, Kernel::True).unwrap();
        assert_eq!(v.path.states(), &[0]);
        assert_eq!(
            viterbi_decode(&m, 0, 1, 1, Kernel::True).unwrap().path.states(),
            &[0, 1]
        );
    }

    #[test]
    fn viterbi_no_path() {
        let m = model(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 0.0], &[1.0, 1.0]);
        assert_eq!(
            viterbi_decode(&m, 0, 1, 4, Kernel::True),
            Err(WhmmError::NoPath { from: 0, to: 1, horizon: 4 })
        );
        assert_eq!(viterbi_decode(&m, 0, 1, 0, Kernel::True), Err(WhmmError::HorizonZero));
    }

    #[test]
    fn viterbi_ties_pick_lexicographic_minimum() {
        // 0 -> {1, 2} equally, both -> 3 with certainty.
        let m = model(
            &[
                &[0.0, 0.5, 0.5, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
                &[0.0, 0.0, 0.0, 1.0],
                &[0.0, 0.0, 0.0, 1.0],
            ],
            &[1.0, 0.0, 0.0, 0.0],
            &[1.0; 4],
        );
        let v = viterbi_decode(&m, 0, 3, 5, Kernel::True).unwrap();
        assert_eq!(v.path.states(), &[0, 1, 3]);
    }
}
