//! The AdaBoost.MH outer loop: weight initialization, base learning, weight
//! update with global normalization, strong-classifier accumulation.

use crate::classifier::{argmax, BaseClassifier, ModelMeta, StrongClassifier};
use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::stump_learner::{energy, SortedColumns, Subset, EDGE_DELTA};
use crate::tree::{tree_base, StumpLearner};
use crate::weights::{init_weights, WeightMatrix, WeightScheme};

/// Kind of base classifier trained each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKind {
    Stump,
    /// Hamming tree with the given inner-node budget.
    Tree { nodes: usize },
}

impl BaseKind {
    pub fn as_str(&self) -> String {
        match self {
            BaseKind::Stump => "stump".into(),
            BaseKind::Tree { nodes } => format!("tree:{nodes}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s == "stump" {
            return Ok(BaseKind::Stump);
        }
        if let Some(n) = s.strip_prefix("tree:") {
            let nodes: usize = n
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad tree size in base kind '{s}'")))?;
            if nodes < 1 {
                return Err(Error::InvalidInput("tree needs N >= 1 inner nodes".into()));
            }
            return Ok(BaseKind::Tree { nodes });
        }
        Err(Error::InvalidInput(format!("unknown base kind '{s}'")))
    }
}

/// Boosting run configuration.
#[derive(Debug, Clone)]
pub struct BoostConfig {
    pub iterations: usize,
    pub base: BaseKind,
    pub scheme: WeightScheme,
    pub seed: u64,
}

impl BoostConfig {
    pub fn new(iterations: usize, base: BaseKind, scheme: WeightScheme, seed: u64) -> Self {
        BoostConfig { iterations, base, scheme, seed }
    }
}

/// Initial weights: either a scheme expanded from the labels or an explicit
/// user matrix whose rows are label distributions (scaled by `1/n` on entry).
#[derive(Debug, Clone)]
pub enum WeightInit {
    Scheme(WeightScheme),
    User(WeightMatrix),
}

/// One row of the boosting trace.
#[derive(Debug, Clone)]
pub struct IterRecord {
    pub t: usize,
    pub z: f64,
    pub edge: f64,
    pub alpha: f64,
    pub train_one_error: Option<f64>,
    pub train_hamming: f64,
    pub test_one_error: Option<f64>,
    pub test_hamming: Option<f64>,
}

/// Per-iteration records plus the stop condition that ended the run.
#[derive(Debug, Clone, Default)]
pub struct BoostTrace {
    pub records: Vec<IterRecord>,
    /// True when the run stopped before the requested iteration count
    /// because the edge hit the clamp ceiling twice in a row.
    pub stopped_early: bool,
}

impl BoostTrace {
    pub fn executed(&self) -> usize {
        self.records.len()
    }

    pub fn z_product(&self) -> f64 {
        self.records.iter().map(|r| r.z).product()
    }
}

/// Multiplicative weight update under a trained base classifier. Returns the
/// updated matrix and the normalizer, which equals `Z(h, W)`.
///
/// Exponents are shifted by their maximum before exponentiation, so extreme
/// coefficients cannot overflow; the shift cancels in the normalization.
pub fn update_weights(
    w: &WeightMatrix,
    h: &BaseClassifier,
    data: &DataSet,
) -> Result<(WeightMatrix, f64)> {
    let total = w.total();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Contract(format!(
            "weight matrix must have unit mass before an update, got {total}"
        )));
    }
    let (n, k) = (data.n(), data.k());
    let alpha = h.alpha();
    let mut exponents = vec![0.0f64; n * k];
    let mut signs = vec![0i8; k];
    let mut max_e = f64::NEG_INFINITY;
    for i in 0..n {
        h.signs_into(data.row(i), &mut signs);
        let yr = data.label_row(i);
        for l in 0..k {
            let e = -alpha * signs[l] as f64 * yr[l] as f64;
            exponents[i * k + l] = e;
            if e > max_e {
                max_e = e;
            }
        }
    }
    let mut updated = w.clone();
    let shifted = updated.as_mut_slice();
    let mut sum = 0.0;
    for (v, &e) in shifted.iter_mut().zip(&exponents) {
        *v *= (e - max_e).exp();
        sum += *v;
    }
    if sum <= 0.0 || sum.is_nan() {
        return Err(Error::Numeric("weight update normalizer vanished".into()));
    }
    let inv = 1.0 / sum;
    for v in shifted.iter_mut() {
        *v *= inv;
    }
    let z = sum * max_e.exp();
    Ok((updated, z))
}

/// Scores plus argmax label, ties toward the smallest index.
pub fn evaluate_strong(f: &StrongClassifier, x: &[f64]) -> Result<(Vec<f64>, usize)> {
    f.evaluate(x)
}

/// Runs AdaBoost.MH and reports per-iteration metrics through `on_iter`.
pub fn adaboost_mh_with<F>(
    train: &DataSet,
    weights: WeightInit,
    config: &BoostConfig,
    test: Option<&DataSet>,
    mut on_iter: F,
) -> Result<(StrongClassifier, BoostTrace)>
where
    F: FnMut(&IterRecord),
{
    if config.iterations < 1 {
        return Err(Error::InvalidInput("need at least one boosting iteration".into()));
    }
    if let BaseKind::Tree { nodes } = config.base {
        if nodes < 1 {
            return Err(Error::InvalidInput("tree base needs N >= 1 inner nodes".into()));
        }
    }
    if let Some(tst) = test {
        if tst.d() != train.d() || tst.k() != train.k() {
            return Err(Error::Dimension(format!(
                "test set is {}x{} classes {}, train is {}x{} classes {}",
                tst.n(),
                tst.d(),
                tst.k(),
                train.n(),
                train.d(),
                train.k()
            )));
        }
    }

    let mut w = match weights {
        WeightInit::Scheme(scheme) => init_weights(train, scheme)?,
        WeightInit::User(user) => {
            if user.n() != train.n() || user.k() != train.k() {
                return Err(Error::Dimension(format!(
                    "user weight matrix is {}x{}, dataset is {}x{}",
                    user.n(),
                    user.k(),
                    train.n(),
                    train.k()
                )));
            }
            user.scaled_by_inverse_n()
        }
    };
    // the trace's loss metrics are taken under the initial weights
    let w_init = w.clone();
    let w_init_test = test.map(|tst| metric_weights(tst, config.scheme)).transpose()?;

    let columns = SortedColumns::new(train);
    let (n, k) = (train.n(), train.k());
    let mut train_scores = vec![0.0f64; n * k];
    let mut test_scores = test.map(|tst| vec![0.0f64; tst.n() * k]);
    let single_label = train.is_single_label();

    let mut f = StrongClassifier::new(k, train.d(), ModelMeta {
        scheme: config.scheme,
        seed: config.seed,
        iterations: config.iterations,
    });
    let mut trace = BoostTrace::default();
    let mut consecutive_clamped = 0usize;

    for t in 1..=config.iterations {
        let subset = Subset::full(train, &columns);
        let (h, edge) = match config.base {
            BaseKind::Stump => {
                let cls = crate::stump_learner::stump_base(train, &w, &subset)?;
                let edge: f64 = crate::stump_learner::classwise_edges(&cls.stump, train, &w)?
                    .iter()
                    .zip(&cls.votes)
                    .map(|(g, &v)| g * v as f64)
                    .sum();
                (BaseClassifier::Stump(cls), edge)
            }
            BaseKind::Tree { nodes } => {
                let build = tree_base(train, &w, &StumpLearner, nodes, subset)?;
                (BaseClassifier::Tree(build.tree), build.edge)
            }
        };
        if edge < -1e-9 {
            return Err(Error::Contract(format!(
                "base learner returned negative edge {edge} at iteration {t}"
            )));
        }

        let (updated, z) = update_weights(&w, &h, train)?;
        let z_analytic = energy(h.alpha(), edge);
        if (z - z_analytic).abs() > 1e-9 {
            return Err(Error::Contract(format!(
                "weight-update normalizer {z} disagrees with the base objective {z_analytic} at iteration {t}"
            )));
        }
        w = updated;

        add_scores(&h, train, &mut train_scores);
        let train_one_error = single_label.then(|| one_error_from_scores(&train_scores, train));
        let train_hamming = hamming_from_scores(&train_scores, train, &w_init);
        let (test_one_error, test_hamming) = match (test, &mut test_scores) {
            (Some(tst), Some(scores)) => {
                add_scores(&h, tst, scores);
                let oe = tst.is_single_label().then(|| one_error_from_scores(scores, tst));
                let hl = w_init_test.as_ref().map(|wt| hamming_from_scores(scores, tst, wt));
                (oe, hl)
            }
            _ => (None, None),
        };

        let record = IterRecord {
            t,
            z,
            edge,
            alpha: h.alpha(),
            train_one_error,
            train_hamming,
            test_one_error,
            test_hamming,
        };
        on_iter(&record);
        trace.records.push(record);
        f.push(h);

        if edge >= 1.0 - EDGE_DELTA {
            consecutive_clamped += 1;
            if consecutive_clamped >= 2 {
                trace.stopped_early = true;
                break;
            }
        } else {
            consecutive_clamped = 0;
        }
    }

    Ok((f, trace))
}

/// Runs AdaBoost.MH (see [`adaboost_mh_with`] for a progress callback).
pub fn adaboost_mh(
    train: &DataSet,
    weights: WeightInit,
    config: &BoostConfig,
    test: Option<&DataSet>,
) -> Result<(StrongClassifier, BoostTrace)> {
    adaboost_mh_with(train, weights, config, test, |_| {})
}

/// Unit-mass weight matrix used for trace metrics on a given dataset,
/// falling back to uniform when the balanced scheme does not apply.
fn metric_weights(data: &DataSet, scheme: WeightScheme) -> Result<WeightMatrix> {
    match init_weights(data, scheme) {
        Ok(w) => Ok(w),
        Err(Error::MultiLabel(_)) => init_weights(data, WeightScheme::Uniform),
        Err(e) => Err(e),
    }
}

fn add_scores(h: &BaseClassifier, data: &DataSet, scores: &mut [f64]) {
    let k = data.k();
    for i in 0..data.n() {
        h.add_output(data.row(i), &mut scores[i * k..(i + 1) * k]);
    }
}

pub(crate) fn one_error_from_scores(scores: &[f64], data: &DataSet) -> f64 {
    let k = data.k();
    let mut wrong = 0usize;
    for i in 0..data.n() {
        let pred = argmax(&scores[i * k..(i + 1) * k]);
        let truth = data.label_index(i).expect("single-label data");
        if pred != truth {
            wrong += 1;
        }
    }
    wrong as f64 / data.n() as f64
}

/// Weighted Hamming loss of the score matrix under a unit-mass weight
/// matrix, with `sign(0) = -1`.
pub(crate) fn hamming_from_scores(scores: &[f64], data: &DataSet, w: &WeightMatrix) -> f64 {
    let k = data.k();
    let mut loss = 0.0;
    for i in 0..data.n() {
        let wr = w.row(i);
        let yr = data.label_row(i);
        for l in 0..k {
            let sign: i8 = if scores[i * k + l] > 0.0 { 1 } else { -1 };
            if sign != yr[l] {
                loss += wr[l];
            }
        }
    }
    loss
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{FactorizedClassifier, Stump};

    fn fixture_a() -> DataSet {
        DataSet::from_labels(vec![0.0, 1.0, 2.0, 3.0], 4, 1, &[1, 2, 1, 2], 2).unwrap()
    }

    fn fixture_b() -> DataSet {
        DataSet::from_labels(vec![0.0, 1.0, 2.0, 3.0], 4, 1, &[1, 1, 2, 2], 2).unwrap()
    }

    fn fixture_c() -> DataSet {
        DataSet::from_labels(vec![0.0, 1.0, 2.0, 3.0], 4, 1, &[1, 2, 2, 1], 2).unwrap()
    }

    fn config(iterations: usize, base: BaseKind) -> BoostConfig {
        BoostConfig::new(iterations, base, WeightScheme::Uniform, 0)
    }

    #[test]
    fn zero_coefficient_update_is_identity() {
        let ds = fixture_a();
        let w = init_weights(&ds, WeightScheme::Uniform).unwrap();
        let h = BaseClassifier::Stump(FactorizedClassifier {
            alpha: 0.0,
            votes: vec![1, -1],
            stump: Stump::new(0, 1.5),
        });
        let (updated, z) = update_weights(&w, &h, &ds).unwrap();
        assert!((z - 1.0).abs() < 1e-12);
        for i in 0..4 {
            for l in 0..2 {
                assert!((updated.get(i, l) - 0.125).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fixture_a_update_matches_hand_values() {
        let ds = fixture_a();
        let w = init_weights(&ds, WeightScheme::Uniform).unwrap();
        let h = BaseClassifier::Stump(FactorizedClassifier {
            alpha: 0.5 * 3.0f64.ln(),
            votes: vec![-1, 1],
            stump: Stump::new(0, 0.5),
        });
        let (updated, z) = update_weights(&w, &h, &ds).unwrap();
        assert!((z - 0.75f64.sqrt()).abs() < 1e-12);
        // row 2 is wrong on both labels; all other entries are correct
        for i in 0..4 {
            for l in 0..2 {
                let expect = if i == 2 { 0.25 } else { 1.0 / 12.0 };
                assert!((updated.get(i, l) - expect).abs() < 1e-12, "i={i} l={l}");
            }
        }
        assert!((updated.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn update_requires_unit_mass() {
        let ds = fixture_a();
        let w = WeightMatrix::from_raw(vec![0.5; 8], 4, 2).unwrap();
        let h = BaseClassifier::Stump(FactorizedClassifier {
            alpha: 0.1,
            votes: vec![1, -1],
            stump: Stump::new(0, 0.5),
        });
        assert!(matches!(update_weights(&w, &h, &ds), Err(Error::Contract(_))));
    }

    #[test]
    fn single_iteration_on_fixture_a() {
        let ds = fixture_a();
        let (f, trace) =
            adaboost_mh(&ds, WeightInit::Scheme(WeightScheme::Uniform), &config(1, BaseKind::Stump), None)
                .unwrap();
        assert_eq!(f.stages.len(), 1);
        let BaseClassifier::Stump(h) = &f.stages[0] else { panic!("expected stump") };
        assert_eq!(h.stump, Stump::new(0, 0.5));
        assert_eq!(h.votes, vec![-1, 1]);
        assert!((h.alpha - 0.5 * 3.0f64.ln()).abs() < 1e-12);
        let r = &trace.records[0];
        assert!((r.z - 0.75f64.sqrt()).abs() < 1e-12);
        assert!((r.edge - 0.5).abs() < 1e-12);
        assert_eq!(r.train_one_error, Some(0.25));
    }

    #[test]
    fn separable_fixture_stops_after_two_clamps() {
        let ds = fixture_b();
        let (_, trace) = adaboost_mh(
            &ds,
            WeightInit::Scheme(WeightScheme::Uniform),
            &config(10, BaseKind::Stump),
            None,
        )
        .unwrap();
        assert_eq!(trace.records[0].train_one_error, Some(0.0));
        assert!(trace.records[0].edge >= 1.0 - EDGE_DELTA);
        assert!(trace.stopped_early);
        assert_eq!(trace.executed(), 2);
    }

    #[test]
    fn tree_base_boosting_on_fixture_c() {
        let ds = fixture_c();
        let (f, trace) = adaboost_mh(
            &ds,
            WeightInit::Scheme(WeightScheme::Uniform),
            &config(3, BaseKind::Tree { nodes: 2 }),
            None,
        )
        .unwrap();
        assert_eq!(trace.records[0].train_one_error, Some(0.0));
        assert!(matches!(f.stages[0], BaseClassifier::Tree(_)));
        // the N=2 tree is perfect, so the edge clamps and the run stops at 2
        assert!(trace.stopped_early);
    }

    #[test]
    fn user_weight_matrix_is_scaled_by_n() {
        let ds = fixture_a();
        // per-row distributions; equivalent to the uniform scheme after 1/n
        let user = WeightMatrix::from_raw(vec![0.5; 8], 4, 2).unwrap();
        let (_, trace_user) =
            adaboost_mh(&ds, WeightInit::User(user), &config(1, BaseKind::Stump), None).unwrap();
        let (_, trace_scheme) = adaboost_mh(
            &ds,
            WeightInit::Scheme(WeightScheme::Uniform),
            &config(1, BaseKind::Stump),
            None,
        )
        .unwrap();
        assert_eq!(trace_user.records[0].z.to_bits(), trace_scheme.records[0].z.to_bits());
    }

    #[test]
    fn test_metrics_recorded_when_requested() {
        let ds = fixture_b();
        let (_, trace) = adaboost_mh(
            &ds,
            WeightInit::Scheme(WeightScheme::Uniform),
            &config(1, BaseKind::Stump),
            Some(&ds),
        )
        .unwrap();
        assert_eq!(trace.records[0].test_one_error, Some(0.0));
        assert!(trace.records[0].test_hamming.is_some());
    }

    #[test]
    fn base_kind_round_trip() {
        assert_eq!(BaseKind::parse("stump").unwrap(), BaseKind::Stump);
        assert_eq!(BaseKind::parse("tree:8").unwrap(), BaseKind::Tree { nodes: 8 });
        assert!(BaseKind::parse("tree:0").is_err());
        assert!(BaseKind::parse("forest").is_err());
    }
}
