//! The stump learner against an exhaustive brute-force oracle.

mod common;

use common::{brute_force_best, direct_energy, random_dataset, random_weights};
use hamboost::{
    classwise_edges, compute_alpha, energy, init_weights, stump_base, DataSet, SortedColumns,
    Stump, Subset, WeightScheme,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn sweep_matches_brute_force_on_random_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..100 {
        let data = random_dataset(&mut rng, 30, 5, 4);
        let w = random_weights(&mut rng, &data);
        let columns = SortedColumns::new(&data);
        let h = stump_base(&data, &w, &Subset::full(&data, &columns)).unwrap();
        let z_sweep = direct_energy(h.alpha, &h.votes, &h.stump, &data, &w);
        let (z_oracle, ..) = brute_force_best(&data, &w);
        assert!(
            (z_sweep - z_oracle).abs() < 1e-10,
            "case {case}: sweep energy {z_sweep} vs oracle {z_oracle}"
        );
    }
}

#[test]
fn sweep_prefix_equals_recomputed_edges() {
    // After processing the sorted prefix of length p, the running edge vector
    // must equal the classwise edges of a stump cutting just above s_p.
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..25 {
        let data = random_dataset(&mut rng, 20, 3, 4);
        let w = random_weights(&mut rng, &data);
        let columns = SortedColumns::new(&data);
        for j in 0..data.d() {
            let col = columns.column(j);
            let mut gamma: Vec<f64> = (0..data.k())
                .map(|l| (0..data.n()).map(|i| w.get(i, l) * data.label_sign(i, l) as f64).sum())
                .collect();
            for (p, &row) in col.iter().enumerate().take(data.n() - 1) {
                let i = row as usize;
                for (l, g) in gamma.iter_mut().enumerate() {
                    *g -= 2.0 * w.get(i, l) * data.label_sign(i, l) as f64;
                }
                let here = data.feature(i, j);
                let next = data.feature(col[p + 1] as usize, j);
                if here != next {
                    let reference =
                        classwise_edges(&Stump::new(j, 0.5 * (here + next)), &data, &w).unwrap();
                    for l in 0..data.k() {
                        assert!(
                            (gamma[l] - reference[l]).abs() < 1e-12,
                            "prefix {p}, class {l}: {} vs {}",
                            gamma[l],
                            reference[l]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn returned_edge_is_never_negative() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..200 {
        let data = random_dataset(&mut rng, 25, 4, 4);
        let w = random_weights(&mut rng, &data);
        let columns = SortedColumns::new(&data);
        let h = stump_base(&data, &w, &Subset::full(&data, &columns)).unwrap();
        let edge: f64 = classwise_edges(&h.stump, &data, &w)
            .unwrap()
            .iter()
            .zip(&h.votes)
            .map(|(g, &v)| g * v as f64)
            .sum();
        assert!(edge >= -1e-15, "negative edge {edge}");
        assert!(h.alpha >= 0.0);
    }
}

#[test]
fn balanced_weights_zero_out_the_constant_classifier() {
    // With equal class counts and the balanced scheme, the constant
    // classifier's edge vector is exactly zero.
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..20 {
        let k = rng.gen_range(2..=5);
        let per_class = rng.gen_range(1..=8);
        let n = k * per_class;
        let mut labels = Vec::with_capacity(n);
        for c in 1..=k {
            labels.extend(std::iter::repeat_n(c, per_class));
        }
        let x: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let data = DataSet::from_labels(x, n, 2, &labels, k).unwrap();
        let w = init_weights(&data, WeightScheme::Balanced).unwrap();
        let gamma0 = classwise_edges(&Stump::constant(), &data, &w).unwrap();
        for (l, g) in gamma0.iter().enumerate() {
            assert!(g.abs() < 1e-12, "class {l} constant edge {g}");
        }
    }
}

#[test]
fn factorized_energy_equals_direct_sum() {
    // The hyperbolic form of the base objective against the definitional
    // double sum, on random classifiers and normalized weight matrices.
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for _ in 0..100 {
        let data = random_dataset(&mut rng, 30, 4, 5);
        let w = random_weights(&mut rng, &data);
        let stump = if rng.gen_bool(0.2) {
            Stump::constant()
        } else {
            Stump::new(rng.gen_range(0..data.d()), rng.gen_range(-5.0..5.0))
        };
        let votes: Vec<i8> =
            (0..data.k()).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let alpha = rng.gen_range(0.0..3.0);
        let edge: f64 = classwise_edges(&stump, &data, &w)
            .unwrap()
            .iter()
            .zip(&votes)
            .map(|(g, &v)| g * v as f64)
            .sum();
        let z_factorized = energy(alpha, edge);
        let z_direct = direct_energy(alpha, &votes, &stump, &data, &w);
        assert!(
            (z_factorized - z_direct).abs() < 1e-10,
            "factorized {z_factorized} vs direct {z_direct}"
        );
    }
}

#[test]
fn optimal_alpha_reaches_the_closed_form_energy() {
    // With the optimizing coefficient the objective is sqrt(1 - gamma^2).
    for gamma in [0.0, 0.1, 0.35, 0.5, 0.9, 0.99] {
        let alpha = compute_alpha(gamma).unwrap();
        assert!((energy(alpha, gamma) - (1.0 - gamma * gamma).sqrt()).abs() < 1e-12);
    }
}
