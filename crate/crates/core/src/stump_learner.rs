//! Exhaustive multi-class decision-stump base learner.
//!
//! One sweep over each pre-sorted feature column finds the threshold and the
//! vote vector that jointly maximize the multi-class edge
//! `gamma = sum_l |gamma_l|`; across features the winner is the stump with
//! the smallest energy `Z`.

use crate::classifier::{FactorizedClassifier, Stump};
use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::weights::WeightMatrix;

/// Edges are clamped to `1 - EDGE_DELTA` before the coefficient formula so
/// separable data yields a large finite alpha.
pub const EDGE_DELTA: f64 = 1e-7;

/// Slack for float dust on contract checks.
const EDGE_EPS: f64 = 1e-12;

/// Per-feature permutations sorting each column ascending, computed once
/// before the boosting loop. Sorting is stable with ties broken by row index
/// so sweep order is deterministic.
#[derive(Debug, Clone)]
pub struct SortedColumns {
    cols: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub fn new(data: &DataSet) -> Self {
        let mut cols = Vec::with_capacity(data.d());
        for j in 0..data.d() {
            let mut order: Vec<u32> = (0..data.n() as u32).collect();
            order.sort_by(|&a, &b| {
                data.feature(a as usize, j)
                    .partial_cmp(&data.feature(b as usize, j))
                    .expect("feature values are finite")
                    .then(a.cmp(&b))
            });
            cols.push(order);
        }
        SortedColumns { cols }
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.cols[j]
    }
}

/// A subset of dataset rows, kept both in original order and pre-sorted per
/// feature. Cutting a subset preserves both orders, so the stump sweep never
/// re-sorts inside the boosting loop.
#[derive(Debug, Clone)]
pub struct Subset {
    pub rows: Vec<u32>,
    pub(crate) sorted: Vec<Vec<u32>>,
}

impl Subset {
    pub fn full(data: &DataSet, columns: &SortedColumns) -> Self {
        Subset {
            rows: (0..data.n() as u32).collect(),
            sorted: columns.cols.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn sorted_column(&self, j: usize) -> &[u32] {
        &self.sorted[j]
    }

    /// Splits by the sign of `phi` on each row, preserving both the original
    /// and the per-feature sorted orders.
    pub fn cut(&self, stump: &Stump, data: &DataSet) -> (Subset, Subset) {
        let (neg_rows, pos_rows) = cut_dataset(&self.rows, stump, data);
        let mut neg_sorted = Vec::with_capacity(self.sorted.len());
        let mut pos_sorted = Vec::with_capacity(self.sorted.len());
        for col in &self.sorted {
            let mut neg = Vec::with_capacity(neg_rows.len());
            let mut pos = Vec::with_capacity(pos_rows.len());
            for &i in col {
                if stump.eval(data.row(i as usize)) == -1 {
                    neg.push(i);
                } else {
                    pos.push(i);
                }
            }
            neg_sorted.push(neg);
            pos_sorted.push(pos);
        }
        (
            Subset { rows: neg_rows, sorted: neg_sorted },
            Subset { rows: pos_rows, sorted: pos_sorted },
        )
    }
}

/// Partitions `rows` by the sign of `phi`: `(negative side, positive side)`,
/// both in original order.
pub fn cut_dataset(rows: &[u32], stump: &Stump, data: &DataSet) -> (Vec<u32>, Vec<u32>) {
    let mut neg = Vec::new();
    let mut pos = Vec::new();
    for &i in rows {
        if stump.eval(data.row(i as usize)) == -1 {
            neg.push(i);
        } else {
            pos.push(i);
        }
    }
    (neg, pos)
}

/// Classwise edges of `phi` with all-ones votes:
/// `gamma_l = sum_i w_{i,l} phi(x_i) y_{i,l}`.
pub fn classwise_edges(stump: &Stump, data: &DataSet, w: &WeightMatrix) -> Result<Vec<f64>> {
    check_dims(data, w)?;
    let rows: Vec<u32> = (0..data.n() as u32).collect();
    Ok(classwise_edges_on(stump, &rows, data, w))
}

pub(crate) fn classwise_edges_on(
    stump: &Stump,
    rows: &[u32],
    data: &DataSet,
    w: &WeightMatrix,
) -> Vec<f64> {
    let k = data.k();
    let mut gamma = vec![0.0; k];
    for &i in rows {
        let i = i as usize;
        let phi = stump.eval(data.row(i)) as f64;
        let wr = w.row(i);
        let yr = data.label_row(i);
        for l in 0..k {
            gamma[l] += wr[l] * phi * yr[l] as f64;
        }
    }
    gamma
}

/// Classwise edges of the constant classifier `phi == +1` restricted to
/// `rows`: `gamma0_l = sum_i w_{i,l} y_{i,l}`.
pub(crate) fn constant_edges_on(rows: &[u32], data: &DataSet, w: &WeightMatrix) -> Vec<f64> {
    let k = data.k();
    let mut gamma = vec![0.0; k];
    for &i in rows {
        let i = i as usize;
        let wr = w.row(i);
        let yr = data.label_row(i);
        for l in 0..k {
            gamma[l] += wr[l] * yr[l] as f64;
        }
    }
    gamma
}

/// Vote maximizing each classwise edge: `+1` where `gamma_l > 0`, otherwise
/// `-1` (zero goes negative so results are deterministic).
pub fn optimal_votes(gamma: &[f64]) -> Vec<i8> {
    gamma.iter().map(|&g| if g > 0.0 { 1 } else { -1 }).collect()
}

/// Base coefficient for a nonnegative edge, clamped below `1 - EDGE_DELTA`:
/// `alpha = ln((1+g)/(1-g)) / 2`.
pub fn compute_alpha(gamma: f64) -> Result<f64> {
    if gamma < -EDGE_EPS {
        return Err(Error::Contract(format!(
            "base learner produced a negative edge {gamma}"
        )));
    }
    if gamma > 1.0 + EDGE_EPS {
        return Err(Error::Numeric(format!("edge {gamma} outside [-1, 1]")));
    }
    let g = gamma.clamp(0.0, 1.0 - EDGE_DELTA);
    Ok(0.5 * ((1.0 + g) / (1.0 - g)).ln())
}

/// Base objective of a `{+alpha,-alpha}`-valued classifier with edge `gamma`
/// under a unit-mass weight matrix:
/// `Z = cosh(alpha) - gamma * sinh(alpha)`.
///
/// At the optimal (unclamped) coefficient this equals `sqrt(1 - gamma^2)`.
pub fn energy(alpha: f64, gamma: f64) -> f64 {
    // exp form avoids cosh overflow for extreme coefficients
    let a = alpha.min(700.0);
    let e = a.exp();
    0.5 * ((1.0 - gamma) * e + (1.0 + gamma) / e)
}

/// Best stump found by one sweep over a sorted column.
#[derive(Debug, Clone, PartialEq)]
pub struct BestStump {
    pub votes: Vec<i8>,
    pub threshold: f64,
    pub gamma: f64,
}

/// Sweeps the sorted subset column `col` of feature `feature`, updating the
/// all-ones classwise edges and keeping the threshold with the largest
/// `sum_l |gamma_l|`. Thresholds sit halfway between distinct consecutive
/// values; if nothing beats the constant classifier the `-inf` sentinel is
/// returned with the optimal votes for `gamma0`.
pub fn best_stump(
    feature: usize,
    col: &[u32],
    data: &DataSet,
    w: &WeightMatrix,
    gamma0: &[f64],
) -> Result<BestStump> {
    let m = col.len();
    if m == 0 {
        return Err(Error::InvalidInput("empty subset in stump search".into()));
    }
    let k = data.k();
    let mut gamma = gamma0.to_vec();
    let mut best_gamma = gamma0.to_vec();
    let mut best_abs = abs_sum(gamma0);
    let mut best_threshold = None;

    for idx in 0..m.saturating_sub(1) {
        let i = col[idx] as usize;
        let wr = w.row(i);
        let yr = data.label_row(i);
        for l in 0..k {
            gamma[l] -= 2.0 * wr[l] * yr[l] as f64;
        }
        let s_i = data.feature(i, feature);
        let s_next = data.feature(col[idx + 1] as usize, feature);
        if s_i != s_next {
            let abs = abs_sum(&gamma);
            if abs > best_abs {
                best_abs = abs;
                best_gamma.copy_from_slice(&gamma);
                best_threshold = Some(0.5 * (s_i + s_next));
            }
        }
    }

    match best_threshold {
        Some(b) => Ok(BestStump { votes: optimal_votes(&best_gamma), threshold: b, gamma: best_abs }),
        // did not beat the constant classifier
        None => Ok(BestStump {
            votes: optimal_votes(gamma0),
            threshold: f64::NEG_INFINITY,
            gamma: abs_sum(gamma0),
        }),
    }
}

fn abs_sum(v: &[f64]) -> f64 {
    v.iter().map(|g| g.abs()).sum()
}

/// Trains the best factorized stump over all features of `subset`: per
/// feature the edge-maximizing sweep, across features the minimum energy,
/// ties to the lowest feature index.
pub fn stump_base(data: &DataSet, w: &WeightMatrix, subset: &Subset) -> Result<FactorizedClassifier> {
    check_dims(data, w)?;
    if subset.is_empty() {
        return Err(Error::InvalidInput("empty subset in stump search".into()));
    }
    let gamma0 = constant_edges_on(&subset.rows, data, w);
    let mut best: Option<(f64, FactorizedClassifier)> = None;
    for j in 0..data.d() {
        let found = best_stump(j, subset.sorted_column(j), data, w, &gamma0)?;
        let alpha = compute_alpha(found.gamma)?;
        let z = energy(alpha, found.gamma);
        let better = match &best {
            None => true,
            Some((best_z, _)) => z < *best_z,
        };
        if better {
            let stump = if found.threshold == f64::NEG_INFINITY {
                Stump::constant()
            } else {
                Stump::new(j, found.threshold)
            };
            best = Some((z, FactorizedClassifier { alpha, votes: found.votes, stump }));
        }
    }
    Ok(best.expect("d >= 1").1)
}

fn check_dims(data: &DataSet, w: &WeightMatrix) -> Result<()> {
    if w.n() != data.n() || w.k() != data.k() {
        return Err(Error::Dimension(format!(
            "weight matrix is {}x{}, dataset is {}x{}",
            w.n(),
            w.k(),
            data.n(),
            data.k()
        )));
    }
    Ok(())
}
