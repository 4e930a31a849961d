//! Shared test helpers: random problem generation and the brute-force stump
//! oracle, kept independent of the library's sweep/energy shortcut paths.
#![allow(dead_code)] // each test binary uses a different subset

use hamboost::{DataSet, Stump, WeightMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_dataset(rng: &mut ChaCha8Rng, max_n: usize, max_d: usize, max_k: usize) -> DataSet {
    let n = rng.gen_range(1..=max_n);
    let d = rng.gen_range(1..=max_d);
    let k = rng.gen_range(2..=max_k);
    // duplicate feature values with prob ~1/3 to exercise the equal-coordinate rule
    let x: Vec<f64> = (0..n * d)
        .map(|_| {
            if rng.gen_bool(0.33) {
                rng.gen_range(0..4) as f64
            } else {
                rng.gen_range(-5.0..5.0)
            }
        })
        .collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=k)).collect();
    DataSet::from_labels(x, n, d, &labels, k).unwrap()
}

pub fn random_weights(rng: &mut ChaCha8Rng, data: &DataSet) -> WeightMatrix {
    let mut w: Vec<f64> = (0..data.n() * data.k()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    WeightMatrix::from_raw(w, data.n(), data.k()).unwrap()
}

/// Direct evaluation of the base objective: `sum_{i,l} w_{i,l} e^{-h_l(x_i) y_{i,l}}`
/// for `h = alpha * v * phi`. This is the definitional double sum, no
/// factorized shortcut.
pub fn direct_energy(
    alpha: f64,
    votes: &[i8],
    stump: &Stump,
    data: &DataSet,
    w: &WeightMatrix,
) -> f64 {
    let mut z = 0.0;
    for i in 0..data.n() {
        let phi = stump.eval(data.row(i)) as f64;
        for (l, &v) in votes.iter().enumerate() {
            let h = alpha * v as f64 * phi;
            z += w.get(i, l) * (-h * data.label_sign(i, l) as f64).exp();
        }
    }
    z
}

/// Edge of `(votes, phi)` from the definition.
pub fn direct_edge(votes: &[i8], stump: &Stump, data: &DataSet, w: &WeightMatrix) -> f64 {
    let mut edge = 0.0;
    for i in 0..data.n() {
        let phi = stump.eval(data.row(i)) as f64;
        for (l, &v) in votes.iter().enumerate() {
            edge += w.get(i, l) * v as f64 * phi * data.label_sign(i, l) as f64;
        }
    }
    edge
}

/// Every candidate stump of the dataset: all midpoints between distinct
/// consecutive sorted values of every feature, plus the constant classifier.
pub fn candidate_stumps(data: &DataSet) -> Vec<Stump> {
    let mut stumps = vec![Stump::constant()];
    for j in 0..data.d() {
        let mut values: Vec<f64> = (0..data.n()).map(|i| data.feature(i, j)).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in values.windows(2) {
            if pair[0] != pair[1] {
                stumps.push(Stump::new(j, 0.5 * (pair[0] + pair[1])));
            }
        }
    }
    stumps
}

/// Exhaustive minimum of the direct energy over
/// {candidate stumps} x {all 2^K vote vectors} with the optimal coefficient
/// for each pair. Returns `(energy, alpha, votes, stump)`.
pub fn brute_force_best(data: &DataSet, w: &WeightMatrix) -> (f64, f64, Vec<i8>, Stump) {
    let k = data.k();
    let mut best: Option<(f64, f64, Vec<i8>, Stump)> = None;
    for stump in candidate_stumps(data) {
        for mask in 0u32..(1 << k) {
            let votes: Vec<i8> = (0..k).map(|l| if mask >> l & 1 == 1 { 1 } else { -1 }).collect();
            let edge = direct_edge(&votes, &stump, data, w);
            if edge < 0.0 {
                continue; // the complement vote vector covers this case
            }
            let alpha = hamboost::compute_alpha(edge).unwrap();
            let z = direct_energy(alpha, &votes, &stump, data, w);
            if best.as_ref().is_none_or(|(bz, ..)| z < *bz) {
                best = Some((z, alpha, votes, stump.clone()));
            }
        }
    }
    best.unwrap()
}
