//! The boosting weight matrix over (instance, label) pairs.

use crate::data::DataSet;
use crate::error::{Error, Result};

/// Weighting scheme used to initialize the matrix from labels alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    /// `1/2` on the positive label, `1/(2(K-1))` on each negative one
    /// (before the global `1/n`). Creates K balanced one-against-all
    /// problems; defined for single-label data only.
    Balanced,
    /// `1/K` on every label (before the global `1/n`).
    Uniform,
}

impl WeightScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightScheme::Balanced => "balanced",
            WeightScheme::Uniform => "uniform",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(WeightScheme::Balanced),
            "uniform" => Ok(WeightScheme::Uniform),
            other => Err(Error::InvalidInput(format!(
                "unknown weight scheme '{other}' (expected balanced or uniform)"
            ))),
        }
    }
}

/// `n x K` nonnegative weights. After initialization or a boosting update the
/// entries sum to 1.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    w: Vec<f64>,
    n: usize,
    k: usize,
}

impl WeightMatrix {
    /// Wraps a raw row-major matrix, rejecting negative or non-finite entries.
    pub fn from_raw(w: Vec<f64>, n: usize, k: usize) -> Result<Self> {
        if w.len() != n * k {
            return Err(Error::Dimension(format!(
                "weight matrix has {} entries, expected {}x{}",
                w.len(),
                n,
                k
            )));
        }
        for (i, v) in w.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "weight at row {}, class {} is {}, expected a nonnegative real",
                    i / k,
                    i % k,
                    v
                )));
            }
        }
        Ok(WeightMatrix { w, n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, row: usize, class: usize) -> f64 {
        self.w[row * self.k + class]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.w[row * self.k..(row + 1) * self.k]
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.w
    }

    /// Divides every entry by `n`, turning per-row label distributions into
    /// the unit-mass matrix the boosting loop works with.
    pub fn scaled_by_inverse_n(mut self) -> Self {
        let inv = 1.0 / self.n as f64;
        for v in &mut self.w {
            *v *= inv;
        }
        self
    }
}

/// Initial weight matrix for boosting. Includes the global `1/n`, so the
/// entries always sum to 1.
pub fn init_weights(data: &DataSet, scheme: WeightScheme) -> Result<WeightMatrix> {
    let (n, k) = (data.n(), data.k());
    let mut w = vec![0.0; n * k];
    match scheme {
        WeightScheme::Balanced => {
            let pos = 1.0 / (2.0 * n as f64);
            let neg = 1.0 / (2.0 * n as f64 * (k as f64 - 1.0));
            for i in 0..n {
                let positives = data.label_row(i).iter().filter(|&&s| s == 1).count();
                if positives != 1 {
                    return Err(Error::MultiLabel(format!(
                        "balanced scheme needs exactly one positive label per row; row {} has {}",
                        i, positives
                    )));
                }
                for l in 0..k {
                    w[i * k + l] = if data.label_sign(i, l) == 1 { pos } else { neg };
                }
            }
        }
        WeightScheme::Uniform => {
            let v = 1.0 / (n as f64 * k as f64);
            w.fill(v);
        }
    }
    WeightMatrix::from_raw(w, n, k)
}
