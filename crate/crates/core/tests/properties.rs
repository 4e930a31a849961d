//! Property tests over randomized inputs.

use hamboost::{
    energy, init_weights, one_hot_encode, optimal_votes, DataSet, FactorizedClassifier, Stump,
    WeightScheme,
};
use proptest::prelude::*;

fn labels_strategy() -> impl Strategy<Value = (Vec<usize>, usize)> {
    (2usize..=8).prop_flat_map(|k| {
        (proptest::collection::vec(1..=k, 1..60), Just(k))
    })
}

proptest! {
    #[test]
    fn init_weights_total_is_one((labels, k) in labels_strategy()) {
        let n = labels.len();
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let ds = DataSet::from_labels(x, n, 1, &labels, k).unwrap();
        for scheme in [WeightScheme::Balanced, WeightScheme::Uniform] {
            let w = init_weights(&ds, scheme).unwrap();
            prop_assert!((w.total() - 1.0).abs() < 1e-12);
            // per-row mass is exactly 1/n in both schemes
            for i in 0..n {
                let row: f64 = w.row(i).iter().sum();
                prop_assert!((row - 1.0 / n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn one_hot_has_exactly_one_positive((labels, k) in labels_strategy()) {
        let y = one_hot_encode(&labels, k).unwrap();
        for (i, &l) in labels.iter().enumerate() {
            let row = &y[i * k..(i + 1) * k];
            prop_assert_eq!(row.iter().filter(|&&s| s == 1).count(), 1);
            prop_assert_eq!(row[l - 1], 1);
        }
    }

    #[test]
    fn factorized_output_matches_componentwise_recompute(
        alpha in 0.0f64..5.0,
        votes in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 2..6),
        x in proptest::collection::vec(-10.0f64..10.0, 1..5),
        threshold in -10.0f64..10.0,
    ) {
        let feature = x.len() - 1;
        let h = FactorizedClassifier { alpha, votes: votes.clone(), stump: Stump::new(feature, threshold) };
        let out = h.evaluate(&x).unwrap();
        let phi: f64 = if x[feature] >= threshold { 1.0 } else { -1.0 };
        for (l, v) in votes.iter().enumerate() {
            prop_assert_eq!(out[l], alpha * *v as f64 * phi);
            prop_assert!((out[l].abs() - alpha).abs() < 1e-15);
        }
    }

    #[test]
    fn votes_make_every_classwise_edge_nonnegative(
        gamma in proptest::collection::vec(-1.0f64..1.0, 1..8)
    ) {
        let votes = optimal_votes(&gamma);
        let mut total = 0.0;
        for (g, v) in gamma.iter().zip(&votes) {
            prop_assert!(g * *v as f64 >= 0.0 || g.abs() == 0.0);
            total += g * *v as f64;
        }
        let l1: f64 = gamma.iter().map(|g| g.abs()).sum();
        prop_assert!((total - l1).abs() < 1e-12);
    }

    #[test]
    fn energy_at_zero_alpha_is_one(gamma in -1.0f64..1.0) {
        prop_assert!((energy(0.0, gamma) - 1.0).abs() < 1e-15);
    }
}
