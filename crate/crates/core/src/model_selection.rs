//! Validation protocol: smoothed stopping time, grid search over the tree
//! size, and k x m cross-validation with retraining on the merged folds.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::boost::{adaboost_mh, BaseKind, BoostConfig, WeightInit};
use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::metrics::one_error;

/// Smoothed validation error at iteration `t` (1-based): the trailing-window
/// sum `sum_{s=floor(0.8 t)}^{t} curve[s]` divided by `t - floor(0.8 t)`.
///
/// The divisor is one less than the number of terms in the inclusive sum;
/// the formula is applied verbatim.
pub fn smoothed_error(curve: &[f64], t: usize) -> f64 {
    let lo = (0.8 * t as f64).floor() as usize;
    let sum: f64 = (lo..=t).map(|s| curve[s - 1]).sum();
    sum / (t - lo) as f64
}

/// Iteration count minimizing the smoothed validation error over
/// `(t_min, t_max]`, ties broken toward the smallest `t`.
pub fn smoothed_stopping_time(curve: &[f64], t_min: usize, t_max: usize) -> Result<usize> {
    if t_min < 1 || t_max <= t_min {
        return Err(Error::InvalidInput(format!(
            "need 1 <= T_min < T_max, got T_min={t_min}, T_max={t_max}"
        )));
    }
    if curve.len() < t_max {
        return Err(Error::InvalidInput(format!(
            "curve has {} entries, T_max is {t_max}",
            curve.len()
        )));
    }
    let mut best_t = t_min + 1;
    let mut best = smoothed_error(curve, best_t);
    for t in (t_min + 2)..=t_max {
        let v = smoothed_error(curve, t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    Ok(best_t)
}

/// Picks the tree size whose run has the smallest smoothed error at its own
/// stopping time. Returns `(N*, T*_{N*})`; ties go to the smallest `N`.
pub fn select_tree_size(
    curves: &BTreeMap<usize, Vec<f64>>,
    t_min: usize,
) -> Result<(usize, usize)> {
    if curves.is_empty() {
        return Err(Error::InvalidInput("empty tree-size grid".into()));
    }
    let t_max = curves.values().next().unwrap().len();
    if curves.values().any(|c| c.len() != t_max) {
        return Err(Error::InvalidInput("validation curves must share T_max".into()));
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for (&n, curve) in curves {
        let t_star = smoothed_stopping_time(curve, t_min, t_max)?;
        let value = smoothed_error(curve, t_star);
        let better = match &best {
            None => true,
            Some((b, _, _)) => value < *b,
        };
        if better {
            best = Some((value, n, t_star));
        }
    }
    let (_, n_star, t_star) = best.unwrap();
    Ok((n_star, t_star))
}

/// Cross-validation plan.
#[derive(Debug, Clone)]
pub struct CvPlan {
    pub folds: usize,
    pub reps: usize,
    pub grid: Vec<usize>,
    pub t_max: usize,
    pub t_min: usize,
    pub seed: u64,
    /// Optional directory of persisted validation curves; runs found there
    /// are loaded instead of retrained.
    pub cache_dir: Option<PathBuf>,
}

impl CvPlan {
    pub fn new(folds: usize, reps: usize, grid: Vec<usize>, t_max: usize, t_min: usize, seed: u64) -> Self {
        CvPlan { folds, reps, grid, t_max, t_min, seed, cache_dir: None }
    }

    fn validate(&self, data: &DataSet) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidInput("need at least 2 folds".into()));
        }
        if data.n() < self.folds {
            return Err(Error::InvalidInput(format!(
                "{} folds over {} instances",
                self.folds,
                data.n()
            )));
        }
        if self.reps < 1 {
            return Err(Error::InvalidInput("need at least 1 validation run".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidInput("empty tree-size grid".into()));
        }
        if self.grid.iter().any(|&n| n < 1) {
            return Err(Error::InvalidInput("tree sizes must be >= 1".into()));
        }
        if self.t_max < 2 || self.t_min >= self.t_max {
            return Err(Error::InvalidInput(format!(
                "need T_min < T_max with T_max >= 2, got T_min={}, T_max={}",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }
}

/// Hyperparameters and held-out error of one outer fold.
#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub n_star: usize,
    pub t_star: usize,
    pub holdout_error: f64,
    /// Validation curves averaged over the inner runs, per grid point.
    pub curves: BTreeMap<usize, Vec<f64>>,
}

/// Cross-validation report: per-fold outcomes plus the aggregate error.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub folds: Vec<FoldOutcome>,
    pub mean_error: f64,
    /// Sample standard deviation over the fold errors, not divided by
    /// `sqrt(k)`.
    pub std_error: f64,
    pub stratified: bool,
    pub warnings: Vec<String>,
    pub seed: u64,
}

impl CvReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, fold) in self.folds.iter().enumerate() {
            out.push_str(&format!(
                "fold {} : N* = {:<3} T* = {:<6} holdout one-error = {:.6}\n",
                i + 1,
                fold.n_star,
                fold.t_star,
                fold.holdout_error
            ));
        }
        out.push_str(&format!(
            "test one-error = {:.4} +/- {:.4} (std over {} folds, not divided by sqrt(k))\n",
            self.mean_error,
            self.std_error,
            self.folds.len()
        ));
        if !self.stratified {
            out.push_str("note: unstratified folds\n");
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

/// Stratified fold assignment: shuffle each class's rows with a seeded RNG
/// and deal them round-robin. Falls back to unstratified dealing when some
/// class has fewer members than `folds`. Depends only on (seed, n, labels).
fn assign_folds(data: &DataSet, folds: usize, seed: u64) -> (Vec<usize>, bool) {
    let n = data.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    let by_class: Option<Vec<Vec<usize>>> = data.is_single_label().then(|| {
        let mut groups = vec![Vec::new(); data.k()];
        for i in 0..n {
            groups[data.label_index(i).unwrap()].push(i);
        }
        groups
    });
    let stratified = by_class
        .as_ref()
        .is_some_and(|groups| groups.iter().all(|g| g.is_empty() || g.len() >= folds));
    if stratified {
        let mut next = 0usize;
        for group in by_class.unwrap() {
            let mut rows = group;
            rows.shuffle(&mut rng);
            for i in rows {
                assignment[i] = next % folds;
                next += 1;
            }
        }
    } else {
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        for (pos, i) in rows.into_iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    (assignment, stratified)
}

fn subset_dataset(data: &DataSet, rows: &[usize]) -> DataSet {
    let d = data.d();
    let k = data.k();
    let mut x = Vec::with_capacity(rows.len() * d);
    let mut y = Vec::with_capacity(rows.len() * k);
    for &i in rows {
        x.extend_from_slice(data.row(i));
        y.extend_from_slice(data.label_row(i));
    }
    DataSet::from_parts(x, y, rows.len(), d, k).expect("subset of a valid dataset")
}

/// Runs the full protocol: stratified outer folds, inner validation runs
/// producing averaged curves per grid point, hyperparameter selection,
/// retraining on the merged outer-training set, held-out evaluation.
pub fn cross_validate(data: &DataSet, plan: &CvPlan, template: &BoostConfig) -> Result<CvReport> {
    plan.validate(data)?;
    let (outer, outer_stratified) = assign_folds(data, plan.folds, plan.seed);
    let mut warnings = Vec::new();
    if !outer_stratified {
        warnings.push("a class has fewer members than the outer fold count; folds unstratified".into());
    }

    let mut outcomes = Vec::with_capacity(plan.folds);
    for fold in 0..plan.folds {
        let train_rows: Vec<usize> = (0..data.n()).filter(|&i| outer[i] != fold).collect();
        let test_rows: Vec<usize> = (0..data.n()).filter(|&i| outer[i] == fold).collect();
        let outer_train = subset_dataset(data, &train_rows);
        let outer_test = subset_dataset(data, &test_rows);

        let curves = validation_curves(&outer_train, plan, template, fold, &mut warnings)?;
        let (n_star, t_star) = select_tree_size(&curves, plan.t_min)?;

        let config = BoostConfig {
            iterations: t_star,
            base: BaseKind::Tree { nodes: n_star },
            scheme: template.scheme,
            seed: plan.seed,
        };
        let (model, _) = adaboost_mh(&outer_train, WeightInit::Scheme(template.scheme), &config, None)?;
        let holdout_error = one_error(&model, &outer_test)?;
        outcomes.push(FoldOutcome { n_star, t_star, holdout_error, curves });
    }

    let k = outcomes.len() as f64;
    let mean = outcomes.iter().map(|f| f.holdout_error).sum::<f64>() / k;
    let std = if outcomes.len() > 1 {
        (outcomes.iter().map(|f| (f.holdout_error - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(CvReport {
        folds: outcomes,
        mean_error: mean,
        std_error: std,
        stratified: outer_stratified,
        warnings,
        seed: plan.seed,
    })
}

/// Averaged validation one-error curves per grid point for one outer fold.
/// Inner runs use stratified `m`-fold splits (a single 80/20 split when
/// `m = 1`). Early-stopped runs are padded with their final value.
fn validation_curves(
    outer_train: &DataSet,
    plan: &CvPlan,
    template: &BoostConfig,
    fold: usize,
    warnings: &mut Vec<String>,
) -> Result<BTreeMap<usize, Vec<f64>>> {
    let inner_folds = if plan.reps == 1 { 5 } else { plan.reps };
    let inner_seed = plan.seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(fold as u64 + 1));
    let (inner, inner_stratified) = assign_folds(outer_train, inner_folds, inner_seed);
    if !inner_stratified {
        warnings.push(format!(
            "fold {}: a class has fewer members than the inner fold count; validation splits unstratified",
            fold + 1
        ));
    }

    let mut curves = BTreeMap::new();
    for &n_nodes in &plan.grid {
        let mut mean_curve = vec![0.0f64; plan.t_max];
        for rep in 0..plan.reps {
            let curve = match load_cached_curve(plan, fold, rep, n_nodes)? {
                Some(curve) => curve,
                None => {
                    let train_rows: Vec<usize> =
                        (0..outer_train.n()).filter(|&i| inner[i] != rep).collect();
                    let valid_rows: Vec<usize> =
                        (0..outer_train.n()).filter(|&i| inner[i] == rep).collect();
                    let inner_train = subset_dataset(outer_train, &train_rows);
                    let validation = subset_dataset(outer_train, &valid_rows);
                    let config = BoostConfig {
                        iterations: plan.t_max,
                        base: BaseKind::Tree { nodes: n_nodes },
                        scheme: template.scheme,
                        seed: plan.seed,
                    };
                    let (_, trace) = adaboost_mh(
                        &inner_train,
                        WeightInit::Scheme(template.scheme),
                        &config,
                        Some(&validation),
                    )?;
                    let mut curve: Vec<f64> = trace
                        .records
                        .iter()
                        .map(|r| r.test_one_error.expect("single-label validation"))
                        .collect();
                    curve.resize(plan.t_max, *curve.last().expect("at least one iteration"));
                    store_cached_curve(plan, fold, rep, n_nodes, &curve)?;
                    curve
                }
            };
            if curve.len() != plan.t_max {
                return Err(Error::InvalidInput(format!(
                    "cached curve for fold {fold}, rep {rep}, N={n_nodes} has {} entries, expected {}",
                    curve.len(),
                    plan.t_max
                )));
            }
            for (m, v) in mean_curve.iter_mut().zip(&curve) {
                *m += v;
            }
        }
        for m in &mut mean_curve {
            *m /= plan.reps as f64;
        }
        curves.insert(n_nodes, mean_curve);
    }
    Ok(curves)
}

fn curve_path(dir: &Path, fold: usize, rep: usize, n_nodes: usize) -> PathBuf {
    dir.join(format!("fold{fold}_rep{rep}_n{n_nodes}.curve"))
}

fn load_cached_curve(plan: &CvPlan, fold: usize, rep: usize, n_nodes: usize) -> Result<Option<Vec<f64>>> {
    let Some(dir) = &plan.cache_dir else { return Ok(None) };
    let path = curve_path(dir, fold, rep, n_nodes);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path)?;
    let mut curve = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let v: f64 = line.trim().parse().map_err(|_| Error::Parse {
            line: ln + 1,
            msg: format!("bad curve value in {}", path.display()),
        })?;
        curve.push(v);
    }
    Ok(Some(curve))
}

fn store_cached_curve(plan: &CvPlan, fold: usize, rep: usize, n_nodes: usize, curve: &[f64]) -> Result<()> {
    let Some(dir) = &plan.cache_dir else { return Ok(()) };
    std::fs::create_dir_all(dir)?;
    let mut text = String::new();
    for v in curve {
        text.push_str(&format!("{v:.17e}\n"));
    }
    std::fs::write(curve_path(dir, fold, rep, n_nodes), text)?;
    Ok(())
}
