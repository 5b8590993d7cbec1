#![allow(dead_code)]

use ccb_core::whmm::{InitialDistribution, SomaticWeights, StateSpace, TransitionMatrix, WeightedMarkovModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random row-stochastic model. With `coarse`, entries are multiples of 1/4 so
/// exact ties and zero entries are common.
pub fn random_model(n: usize, seed: u64, coarse: bool) -> WeightedMarkovModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let row = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        loop {
            let raw: Vec<f64> = (0..n)
                .map(|_| {
                    if coarse {
                        rng.random_range(0..3) as f64
                    } else if rng.random_bool(0.25) {
                        0.0
                    } else {
                        rng.random::<f64>()
                    }
                })
                .collect();
            let total: f64 = raw.iter().sum();
            if total > 0.0 {
                return raw.iter().map(|x| x / total).collect();
            }
        }
    };
    let rows: Vec<Vec<f64>> = (0..n).map(|_| row(&mut rng)).collect();
    let initial = row(&mut rng);
    let weights: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() * 4.0 - 2.0).exp()).collect();
    WeightedMarkovModel::new(
        StateSpace::plain(n).unwrap(),
        TransitionMatrix::new(rows).unwrap(),
        InitialDistribution::new(initial).unwrap(),
        SomaticWeights::new(weights).unwrap(),
    )
    .unwrap()
}

/// Every state sequence of exactly `len` states starting at `from`.
pub fn paths_from(n: usize, from: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![from]];
    for _ in 1..len {
        out = out
            .into_iter()
            .flat_map(|p| (0..n).map(move |s| {
                let mut q = p.clone();
                q.push(s);
                q
            }))
            .collect();
    }
    out
}

pub fn path_prob(m: &TransitionMatrix, path: &[usize]) -> f64 {
    path.windows(2).map(|w| m.get(w[0], w[1])).product()
}
