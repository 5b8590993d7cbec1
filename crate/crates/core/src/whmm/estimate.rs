use super::{
    forward_likelihood, transition_counts, Kernel, SomaticWeights, Trajectory, WeightedMarkovModel,
    WhmmError,
};

/// Knobs for [`estimate_weights`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub max_iterations: usize,
    /// Stop once an iteration improves the log-likelihood by less than this.
    pub tolerance: f64,
    /// Box constraint on each weight after gauge fixing.
    pub min_weight: f64,
    pub max_weight: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { max_iterations: 20_000, tolerance: 1e-13, min_weight: 1e-8, max_weight: 1e8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightFit {
    /// Gauge-fixed so that the first weight is 1.
    pub weights: SomaticWeights,
    pub log_likelihood: f64,
    /// Log-likelihood of the all-ones weights, for comparison.
    pub neutral_log_likelihood: f64,
    pub iterations: usize,
    /// False when the iteration budget ran out; `weights` is then the best seen.
    pub converged: bool,
}

/// Total subjective log-likelihood of `paths` under `model`.
pub fn log_likelihood(model: &WeightedMarkovModel, paths: &[Trajectory]) -> Result<f64, WhmmError> {
    paths.iter().try_fold(0.0, |acc, p| {
        Ok(acc + forward_likelihood(model, p, Kernel::Subjective)?.0)
    })
}

/// Sufficient statistics of the weight likelihood.
struct Counts {
    /// n_ij
    pairs: Vec<Vec<u64>>,
    /// n_i = Σ_j n_ij
    rows: Vec<f64>,
    /// c_j = Σ_i n_ij
    entries: Vec<f64>,
    /// Σ_paths log π_{s0}
    initial: f64,
}

impl Counts {
    fn new(paths: &[Trajectory], n: usize, base: &WeightedMarkovModel) -> Self {
        let pairs = transition_counts(paths, n);
        let rows = pairs.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
        let entries = (0..n).map(|j| pairs.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
        let initial = paths.iter().map(|p| base.initial().probs()[p.states()[0]].ln()).sum();
        Self { pairs, rows, entries, initial }
    }

    fn log_likelihood(&self, base: &WeightedMarkovModel, w: &[f64]) -> f64 {
        let a = base.transitions();
        let mut ll = self.initial;
        for (i, row) in self.pairs.iter().enumerate() {
            if self.rows[i] == 0.0 {
                continue;
            }
            let norm: f64 = a.row(i).iter().zip(w).map(|(p, wk)| p * wk).sum();
            for (j, &count) in row.iter().enumerate() {
                if count > 0 {
                    ll += count as f64 * (a.get(i, j) * w[j] / norm).ln();
                }
            }
        }
        ll
    }
}

/// Maximum-likelihood somatic weights for observed state paths, with the
/// dynamics and initial distribution of `base` held fixed.
///
/// Uses the minorize-maximize update for Luce-type choice models,
///
/// ```text
/// w_j ← c_j / Σ_i n_i a_ij / S_i(w),    S_i(w) = Σ_k a_ik w_k
/// ```
///
/// which never decreases the likelihood, followed by projection onto
/// `w_0 = 1` and the weight box. The log-likelihood is concave in `log w`, so
/// the fixed point is the global optimum. Weights of states that no visited
/// row can enter do not affect the likelihood and stay at 1.
pub fn estimate_weights(
    observed: &[Trajectory],
    base: &WeightedMarkovModel,
    options: &EstimateOptions,
) -> Result<WeightFit, WhmmError> {
    if observed.is_empty() {
        return Err(WhmmError::EmptyObservations);
    }
    let neutral = base.neutral();
    for (index, path) in observed.iter().enumerate() {
        path.check(base)?;
        if !path.is_feasible(&neutral, Kernel::True) {
            return Err(WhmmError::ImpossibleObservation { path: index });
        }
    }

    let n = base.n();
    let a = base.transitions();
    let counts = Counts::new(observed, n, base);

    let mut w = vec![1.0; n];
    let neutral_ll = counts.log_likelihood(base, &w);
    let mut best = (neutral_ll, w.clone());
    let mut previous = neutral_ll;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        let norms: Vec<f64> =
            (0..n).map(|i| a.row(i).iter().zip(&w).map(|(p, wk)| p * wk).sum()).collect();
        let mut next = w.clone();
        for j in 0..n {
            let exposure: f64 = (0..n)
                .filter(|&i| counts.rows[i] > 0.0)
                .map(|i| counts.rows[i] * a.get(i, j) / norms[i])
                .sum();
            if exposure > 0.0 {
                next[j] = counts.entries[j] / exposure;
            }
        }
        let gauge = next[0].max(options.min_weight);
        for x in next.iter_mut() {
            *x = (*x / gauge).clamp(options.min_weight, options.max_weight);
        }
        next[0] = 1.0;

        let ll = counts.log_likelihood(base, &next);
        if ll > best.0 {
            best = (ll, next.clone());
        }
        let settled = w
            .iter()
            .zip(&next)
            .all(|(old, new)| (old - new).abs() <= 1e-12 * old.abs().max(1.0));
        w = next;
        if (ll - previous).abs() <= options.tolerance * previous.abs().max(1.0) && settled {
            converged = true;
            break;
        }
        previous = ll;
    }

    let weights = SomaticWeights::new(best.1)?;
    let fitted = base.with_weights(weights.clone())?;
    Ok(WeightFit {
        log_likelihood: log_likelihood(&fitted, observed)?,
        neutral_log_likelihood: log_likelihood(&neutral, observed)?,
        weights,
        iterations,
        converged,
    })
}
