//! Loss and error functionals of the strong classifier.
//!
//! The weighted metrics take a user weight matrix whose rows are label
//! distributions and apply the `1/n` themselves. `sign(0) = -1` everywhere,
//! consistent with the vote tie rule.

use crate::boost::{hamming_from_scores, one_error_from_scores};
use crate::classifier::StrongClassifier;
use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::weights::WeightMatrix;

/// Evaluation summary produced by one pass over cached scores.
#[derive(Debug, Clone)]
pub struct EvalReport {
    /// Fraction of argmax misclassifications; absent on multi-label data.
    pub one_error: Option<f64>,
    pub hamming_loss: f64,
    pub exp_risk: f64,
    pub n_eval: usize,
}

impl EvalReport {
    /// Computes all metrics for `f` on `data`, scoring each instance once.
    pub fn compute(f: &StrongClassifier, data: &DataSet, w_user: &WeightMatrix) -> Result<Self> {
        check(f, data, Some(w_user))?;
        let scores = score_matrix(f, data)?;
        let w_unit = unit_mass(w_user);
        let one_error = data
            .is_single_label()
            .then(|| one_error_from_scores(&scores, data));
        Ok(EvalReport {
            one_error,
            hamming_loss: hamming_from_scores(&scores, data, &w_unit),
            exp_risk: exp_risk_from_scores(&scores, data, &w_unit),
            n_eval: data.n(),
        })
    }

    /// The key=value serialization consumed by the CLI.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        if let Some(oe) = self.one_error {
            out.push_str(&format!("one_error = {oe}\n"));
        }
        out.push_str(&format!("hamming_loss = {}\n", self.hamming_loss));
        out.push_str(&format!("exp_risk = {}\n", self.exp_risk));
        out.push_str(&format!("n_eval = {}\n", self.n_eval));
        out
    }
}

/// Row-major `n x K` score matrix `f(x_i)`.
pub fn score_matrix(f: &StrongClassifier, data: &DataSet) -> Result<Vec<f64>> {
    let k = data.k();
    let mut scores = vec![0.0; data.n() * k];
    for i in 0..data.n() {
        let (row, _) = f.evaluate(data.row(i))?;
        scores[i * k..(i + 1) * k].copy_from_slice(&row);
    }
    Ok(scores)
}

/// Single-label training error: fraction of rows where the argmax label
/// misses the true class.
pub fn one_error(f: &StrongClassifier, data: &DataSet) -> Result<f64> {
    check(f, data, None)?;
    if !data.is_single_label() {
        return Err(Error::MultiLabel(
            "one-error is defined for single-label data only".into(),
        ));
    }
    let scores = score_matrix(f, data)?;
    Ok(one_error_from_scores(&scores, data))
}

/// Weighted Hamming loss `(1/n) sum_i sum_l w_{i,l} 1{sign(f_l(x_i)) != y_{i,l}}`.
pub fn hamming_loss(f: &StrongClassifier, data: &DataSet, w_user: &WeightMatrix) -> Result<f64> {
    check(f, data, Some(w_user))?;
    let scores = score_matrix(f, data)?;
    Ok(hamming_from_scores(&scores, data, &unit_mass(w_user)))
}

/// Weighted exponential margin-based risk
/// `(1/n) sum_i sum_l w_{i,l} exp(-f_l(x_i) y_{i,l})`.
pub fn exp_risk(f: &StrongClassifier, data: &DataSet, w_user: &WeightMatrix) -> Result<f64> {
    check(f, data, Some(w_user))?;
    let scores = score_matrix(f, data)?;
    Ok(exp_risk_from_scores(&scores, data, &unit_mass(w_user)))
}

pub(crate) fn exp_risk_from_scores(scores: &[f64], data: &DataSet, w_unit: &WeightMatrix) -> f64 {
    let k = data.k();
    let mut risk = 0.0;
    for i in 0..data.n() {
        let wr = w_unit.row(i);
        let yr = data.label_row(i);
        for l in 0..k {
            // cap the exponent; margins past ~700 would overflow and their
            // true contribution is astronomically large anyway
            let e = (-scores[i * k + l] * yr[l] as f64).min(700.0);
            risk += wr[l] * e.exp();
        }
    }
    risk
}

fn unit_mass(w_user: &WeightMatrix) -> WeightMatrix {
    w_user.clone().scaled_by_inverse_n()
}

fn check(f: &StrongClassifier, data: &DataSet, w: Option<&WeightMatrix>) -> Result<()> {
    if f.k != data.k() || f.d != data.d() {
        return Err(Error::Dimension(format!(
            "model expects d={} K={}, dataset has d={} K={}",
            f.d,
            f.k,
            data.d(),
            data.k()
        )));
    }
    if let Some(w) = w {
        if w.n() != data.n() || w.k() != data.k() {
            return Err(Error::Dimension(format!(
                "weight matrix is {}x{}, dataset is {}x{}",
                w.n(),
                w.k(),
                data.n(),
                data.k()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{BaseClassifier, FactorizedClassifier, ModelMeta, Stump};

    fn fixture_a() -> DataSet {
        DataSet::from_labels(vec![0.0, 1.0, 2.0, 3.0], 4, 1, &[1, 2, 1, 2], 2).unwrap()
    }

    fn one_stage_a() -> StrongClassifier {
        let mut f = StrongClassifier::new(2, 1, ModelMeta::default());
        f.push(BaseClassifier::Stump(FactorizedClassifier {
            alpha: 0.5 * 3.0f64.ln(),
            votes: vec![-1, 1],
            stump: Stump::new(0, 0.5),
        }));
        f
    }

    fn uniform_user(n: usize, k: usize) -> WeightMatrix {
        WeightMatrix::from_raw(vec![1.0 / k as f64; n * k], n, k).unwrap()
    }

    #[test]
    fn one_error_fixture_a() {
        let ds = fixture_a();
        assert_eq!(one_error(&one_stage_a(), &ds).unwrap(), 0.25);
        // the zero classifier ties everywhere; ties go to class 1
        let zero = StrongClassifier::new(2, 1, ModelMeta::default());
        assert_eq!(one_error(&zero, &ds).unwrap(), 0.5);
    }

    #[test]
    fn one_error_rejects_multi_label() {
        let ds = DataSet::from_parts(vec![0.0, 1.0], vec![1, 1, -1, -1], 2, 1, 2).unwrap();
        let zero = StrongClassifier::new(2, 1, ModelMeta::default());
        assert!(matches!(one_error(&zero, &ds), Err(Error::MultiLabel(_))));
    }

    #[test]
    fn hamming_fixture_a() {
        let ds = fixture_a();
        let w = uniform_user(4, 2);
        let hl = hamming_loss(&one_stage_a(), &ds, &w).unwrap();
        assert!((hl - 0.25).abs() < 1e-12);
        // f == 0 under sign(0) = -1: one mismatch per row at weight 1/2
        let zero = StrongClassifier::new(2, 1, ModelMeta::default());
        assert!((hamming_loss(&zero, &ds, &w).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exp_risk_fixture_a() {
        let ds = fixture_a();
        let w = uniform_user(4, 2);
        let zero = StrongClassifier::new(2, 1, ModelMeta::default());
        assert!((exp_risk(&zero, &ds, &w).unwrap() - 1.0).abs() < 1e-12);
        let er = exp_risk(&one_stage_a(), &ds, &w).unwrap();
        assert!((er - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exp_risk_dominates_hamming() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..=12);
            let d = rng.gen_range(1..=3);
            let k = rng.gen_range(2..=4);
            let x: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=k)).collect();
            let ds = DataSet::from_labels(x, n, d, &labels, k).unwrap();
            let mut f = StrongClassifier::new(k, d, ModelMeta::default());
            for _ in 0..rng.gen_range(0..4) {
                f.push(BaseClassifier::Stump(FactorizedClassifier {
                    alpha: rng.gen_range(0.0..1.5),
                    votes: (0..k).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect(),
                    stump: Stump::new(rng.gen_range(0..d), rng.gen_range(-2.0..2.0)),
                }));
            }
            let mut w = vec![0.0; n * k];
            for row in 0..n {
                let mut mass = 0.0;
                for l in 0..k {
                    let v: f64 = rng.gen_range(0.0..1.0);
                    w[row * k + l] = v;
                    mass += v;
                }
                for l in 0..k {
                    w[row * k + l] /= mass;
                }
            }
            let w = WeightMatrix::from_raw(w, n, k).unwrap();
            let hl = hamming_loss(&f, &ds, &w).unwrap();
            let er = exp_risk(&f, &ds, &w).unwrap();
            assert!(er >= hl - 1e-12, "exp {er} < hamming {hl}");
        }
    }

    #[test]
    fn one_error_scale_invariant() {
        let ds = fixture_a();
        let mut f = one_stage_a();
        let before = one_error(&f, &ds).unwrap();
        if let BaseClassifier::Stump(s) = &mut f.stages[0] {
            s.alpha *= 37.0;
        }
        assert_eq!(one_error(&f, &ds).unwrap(), before);
    }

    #[test]
    fn metrics_are_row_permutation_invariant() {
        let ds = fixture_a();
        let f = one_stage_a();
        let w = uniform_user(4, 2);
        // reverse the rows of X, Y, and W together
        let perm = [3usize, 2, 1, 0];
        let x: Vec<f64> = perm.iter().flat_map(|&i| ds.row(i).to_vec()).collect();
        let y: Vec<i8> = perm.iter().flat_map(|&i| ds.label_row(i).to_vec()).collect();
        let wp: Vec<f64> = perm.iter().flat_map(|&i| w.row(i).to_vec()).collect();
        let ds_p = DataSet::from_parts(x, y, 4, 1, 2).unwrap();
        let w_p = WeightMatrix::from_raw(wp, 4, 2).unwrap();
        assert_eq!(one_error(&f, &ds).unwrap(), one_error(&f, &ds_p).unwrap());
        assert!((hamming_loss(&f, &ds, &w).unwrap() - hamming_loss(&f, &ds_p, &w_p).unwrap()).abs() < 1e-15);
        assert!((exp_risk(&f, &ds, &w).unwrap() - exp_risk(&f, &ds_p, &w_p).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn report_key_values() {
        let ds = fixture_a();
        let w = uniform_user(4, 2);
        let report = EvalReport::compute(&one_stage_a(), &ds, &w).unwrap();
        let text = report.to_key_values();
        assert!(text.contains("one_error = 0.25"));
        assert!(text.contains("n_eval = 4"));
    }
}
