//! Observation and label matrices.
//!
//! A [`DataSet`] couples an `n x d` real observation matrix `X` with an
//! `n x K` sign matrix `Y` (`+1`/`-1` entries). Single-label problems are the
//! special case where each row of `Y` carries exactly one `+1`; multi-label
//! data is ingested directly as a sign matrix.

use crate::error::{Error, Result};

/// Training or test unit: observations plus sign labels.
#[derive(Debug, Clone)]
pub struct DataSet {
    x: Vec<f64>, // n x d, row-major
    y: Vec<i8>,  // n x K, row-major
    n: usize,
    d: usize,
    k: usize,
}

impl DataSet {
    /// Builds a dataset from raw row-major matrices, validating every
    /// invariant: finite features, `+1`/`-1` labels, `n >= 1`, `d >= 1`,
    /// `K >= 2`.
    pub fn from_parts(x: Vec<f64>, y: Vec<i8>, n: usize, d: usize, k: usize) -> Result<Self> {
        if n < 1 || d < 1 {
            return Err(Error::InvalidInput(format!(
                "need n >= 1 and d >= 1, got n={n}, d={d}"
            )));
        }
        if k < 2 {
            return Err(Error::InvalidInput(format!("need K >= 2 classes, got K={k}")));
        }
        if x.len() != n * d {
            return Err(Error::Dimension(format!(
                "observation matrix has {} entries, expected {}x{}",
                x.len(),
                n,
                d
            )));
        }
        if y.len() != n * k {
            return Err(Error::Dimension(format!(
                "label matrix has {} entries, expected {}x{}",
                y.len(),
                n,
                k
            )));
        }
        for (i, v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite feature value at row {}, column {}",
                    i / d,
                    i % d
                )));
            }
        }
        for (i, s) in y.iter().enumerate() {
            if *s != 1 && *s != -1 {
                return Err(Error::InvalidInput(format!(
                    "label matrix entry at row {}, class {} is {}, expected +1 or -1",
                    i / k,
                    i % k,
                    s
                )));
            }
        }
        Ok(DataSet { x, y, n, d, k })
    }

    /// Builds a single-label dataset from 1-based class indices.
    pub fn from_labels(x: Vec<f64>, n: usize, d: usize, labels: &[usize], k: usize) -> Result<Self> {
        let y = one_hot_encode(labels, k)?;
        Self::from_parts(x, y, n, d, k)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn feature(&self, row: usize, col: usize) -> f64 {
        self.x[row * self.d + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.x[row * self.d..(row + 1) * self.d]
    }

    /// Sign of label `class` for instance `row`.
    #[inline]
    pub fn label_sign(&self, row: usize, class: usize) -> i8 {
        self.y[row * self.k + class]
    }

    #[inline]
    pub fn label_row(&self, row: usize) -> &[i8] {
        &self.y[row * self.k..(row + 1) * self.k]
    }

    /// True when every row has exactly one positive label.
    pub fn is_single_label(&self) -> bool {
        (0..self.n).all(|i| self.label_row(i).iter().filter(|&&s| s == 1).count() == 1)
    }

    /// 0-based index of the unique positive label of `row`, when there is one.
    pub fn label_index(&self, row: usize) -> Option<usize> {
        let r = self.label_row(row);
        let mut found = None;
        for (l, &s) in r.iter().enumerate() {
            if s == 1 {
                if found.is_some() {
                    return None;
                }
                found = Some(l);
            }
        }
        found
    }
}

/// Expands 1-based class indices into a row-major `n x K` sign matrix:
/// `+1` at the class position, `-1` elsewhere.
pub fn one_hot_encode(labels: &[usize], k: usize) -> Result<Vec<i8>> {
    let mut y = vec![-1i8; labels.len() * k];
    for (i, &l) in labels.iter().enumerate() {
        if l < 1 || l > k {
            return Err(Error::InvalidInput(format!(
                "label {} at row {} outside 1..={}",
                l,
                i + 1,
                k
            )));
        }
        y[i * k + (l - 1)] = 1;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_basics() {
        assert_eq!(one_hot_encode(&[1], 2).unwrap(), vec![1, -1]);
        assert_eq!(one_hot_encode(&[2, 1], 2).unwrap(), vec![-1, 1, 1, -1]);
        assert_eq!(one_hot_encode(&[3], 3).unwrap(), vec![-1, -1, 1]);
    }

    #[test]
    fn one_hot_out_of_range_names_row() {
        let err = one_hot_encode(&[1, 4], 3).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(one_hot_encode(&[0], 3).is_err());
    }

    #[test]
    fn dataset_invariants() {
        assert!(DataSet::from_labels(vec![0.0], 1, 1, &[1], 1).is_err()); // K=1
        assert!(DataSet::from_parts(vec![], vec![], 0, 1, 2).is_err());
        assert!(DataSet::from_parts(vec![f64::NAN], vec![1, -1], 1, 1, 2).is_err());
        assert!(DataSet::from_parts(vec![0.0], vec![1, 0], 1, 1, 2).is_err());

        let ds = DataSet::from_labels(vec![0.0, 1.0], 2, 1, &[1, 2], 2).unwrap();
        assert!(ds.is_single_label());
        assert_eq!(ds.label_index(0), Some(0));
        assert_eq!(ds.label_index(1), Some(1));
        assert_eq!(ds.label_sign(0, 1), -1);
    }

    #[test]
    fn multi_label_rows_detected() {
        let ds = DataSet::from_parts(vec![0.0, 1.0], vec![1, 1, -1, -1], 2, 1, 2).unwrap();
        assert!(!ds.is_single_label());
        assert_eq!(ds.label_index(0), None);
        assert_eq!(ds.label_index(1), None);
    }
}
