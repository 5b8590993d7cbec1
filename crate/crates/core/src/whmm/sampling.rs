use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Kernel, Trajectory, WeightedMarkovModel, WhmmError};

/// Index drawn from a discrete distribution. Zero-probability entries are never returned.
pub(crate) fn draw_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut cumulative = 0.0;
    let mut last_positive = None;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last_positive = Some(i);
        if target < cumulative {
            return i;
        }
    }
    // Rounding left `target` just past the final cumulative sum.
    last_positive.expect("distribution has no positive entry")
}

/// Samples `horizon` transitions (so `horizon + 1` states) with `s0 ~ π` and
/// `s_{t+1} ~ M[s_t, ·]`. Fully determined by `seed`.
pub fn sample_trajectory(
    model: &WeightedMarkovModel,
    horizon: usize,
    seed: u64,
    kernel: Kernel,
) -> Result<Trajectory, WhmmError> {
    if horizon == 0 {
        return Err(WhmmError::HorizonZero);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = model.kernel(kernel);
    let mut states = Vec::with_capacity(horizon + 1);
    let mut current = draw_index(model.initial().probs(), &mut rng);
    states.push(current);
    for _ in 0..horizon {
        current = draw_index(m.row(current), &mut rng);
        states.push(current);
    }
    Trajectory::new(states)
}

/// Transition counts `n_ij` over a set of paths on `n` states.
pub fn transition_counts<'a, I>(paths: I, n: usize) -> Vec<Vec<u64>>
where
    I: IntoIterator<Item = &'a Trajectory>,
{
    let mut counts = vec![vec![0u64; n]; n];
    for path in paths {
        for w in path.states().windows(2) {
            counts[w[0]][w[1]] += 1;
        }
    }
    counts
}
