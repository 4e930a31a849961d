//! Base classifiers and the strong (boosted) discriminant.

use crate::error::{Error, Result};
use crate::tree::HammingTree;
use crate::weights::WeightScheme;

/// Scalar decision stump: `+1` iff `x[feature] >= threshold`.
///
/// The threshold `-inf` is the constant classifier (always `+1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
}

impl Stump {
    pub fn new(feature: usize, threshold: f64) -> Self {
        Stump { feature, threshold }
    }

    /// The constant classifier `phi == +1`.
    pub fn constant() -> Self {
        Stump { feature: 0, threshold: f64::NEG_INFINITY }
    }

    pub fn is_constant(&self) -> bool {
        self.threshold == f64::NEG_INFINITY
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> i8 {
        if x[self.feature] >= self.threshold {
            1
        } else {
            -1
        }
    }
}

/// Discrete factorized base classifier `h(x) = alpha * v * phi(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedClassifier {
    pub alpha: f64,
    pub votes: Vec<i8>,
    pub stump: Stump,
}

impl FactorizedClassifier {
    /// `h(x)` as a length-K vector; every entry has magnitude `alpha`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.stump.feature >= x.len() {
            return Err(Error::Dimension(format!(
                "stump reads feature {} but input has {} components",
                self.stump.feature,
                x.len()
            )));
        }
        let phi = self.stump.eval(x) as f64;
        Ok(self.votes.iter().map(|&v| self.alpha * v as f64 * phi).collect())
    }
}

/// One stage of the strong classifier.
#[derive(Debug, Clone)]
pub enum BaseClassifier {
    Stump(FactorizedClassifier),
    Tree(HammingTree),
}

impl BaseClassifier {
    pub fn k(&self) -> usize {
        match self {
            BaseClassifier::Stump(s) => s.votes.len(),
            BaseClassifier::Tree(t) => t.k(),
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            BaseClassifier::Stump(s) => s.alpha,
            BaseClassifier::Tree(t) => t.alpha,
        }
    }

    /// Writes the `{+1,-1}`-valued output (the classifier without its
    /// coefficient) into `out`.
    pub(crate) fn signs_into(&self, x: &[f64], out: &mut [i8]) {
        match self {
            BaseClassifier::Stump(s) => {
                let phi = s.stump.eval(x);
                for (o, &v) in out.iter_mut().zip(&s.votes) {
                    *o = v * phi;
                }
            }
            BaseClassifier::Tree(t) => t.signs_into(x, out),
        }
    }

    /// Adds `h(x)` onto `scores`.
    pub(crate) fn add_output(&self, x: &[f64], scores: &mut [f64]) {
        let alpha = self.alpha();
        match self {
            BaseClassifier::Stump(s) => {
                let phi = s.stump.eval(x) as f64;
                for (sc, &v) in scores.iter_mut().zip(&s.votes) {
                    *sc += alpha * v as f64 * phi;
                }
            }
            BaseClassifier::Tree(t) => {
                let mut signs = vec![0i8; scores.len()];
                t.signs_into(x, &mut signs);
                for (sc, &s) in scores.iter_mut().zip(&signs) {
                    *sc += alpha * s as f64;
                }
            }
        }
    }
}

/// Metadata carried by a trained model.
#[derive(Debug, Clone)]
pub struct ModelMeta {
    pub scheme: WeightScheme,
    pub seed: u64,
    pub iterations: usize,
}

impl Default for ModelMeta {
    fn default() -> Self {
        ModelMeta { scheme: WeightScheme::Balanced, seed: 0, iterations: 0 }
    }
}

/// Sum of base classifiers: the discriminant `f(x) = sum_t h_t(x)`.
#[derive(Debug, Clone)]
pub struct StrongClassifier {
    pub stages: Vec<BaseClassifier>,
    pub k: usize,
    pub d: usize,
    pub meta: ModelMeta,
}

impl StrongClassifier {
    pub fn new(k: usize, d: usize, meta: ModelMeta) -> Self {
        StrongClassifier { stages: Vec::new(), k, d, meta }
    }

    pub fn push(&mut self, stage: BaseClassifier) {
        debug_assert_eq!(stage.k(), self.k);
        self.stages.push(stage);
    }

    /// Scores plus the argmax label (0-based), ties broken toward the
    /// smallest index. An empty classifier scores zero everywhere and
    /// predicts label 0.
    pub fn evaluate(&self, x: &[f64]) -> Result<(Vec<f64>, usize)> {
        if x.len() != self.d {
            return Err(Error::Dimension(format!(
                "input has {} components, model expects {}",
                x.len(),
                self.d
            )));
        }
        let mut scores = vec![0.0; self.k];
        for stage in &self.stages {
            stage.add_output(x, &mut scores);
        }
        let label = argmax(&scores);
        Ok((scores, label))
    }
}

/// Index of the maximum, smallest index on ties.
#[inline]
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stump_threshold_closed_on_right() {
        let s = Stump::new(0, 0.5);
        assert_eq!(s.eval(&[0.5]), 1);
        assert_eq!(s.eval(&[0.49]), -1);
        assert!(Stump::constant().is_constant());
        assert_eq!(Stump::constant().eval(&[-1e300]), 1);
    }

    #[test]
    fn factorized_evaluation() {
        let half_ln3 = 0.5 * 3.0f64.ln();
        let h = FactorizedClassifier {
            alpha: half_ln3,
            votes: vec![-1, 1],
            stump: Stump::new(0, 0.5),
        };
        // phi(0) = -1
        let out = h.evaluate(&[0.0]).unwrap();
        assert!((out[0] - half_ln3).abs() < 1e-15);
        assert!((out[1] + half_ln3).abs() < 1e-15);
        // phi(2) = +1
        let out = h.evaluate(&[2.0]).unwrap();
        assert!((out[0] + half_ln3).abs() < 1e-15);
        assert!((out[1] - half_ln3).abs() < 1e-15);

        let zero = FactorizedClassifier { alpha: 0.0, votes: vec![1, 1], stump: Stump::new(0, 0.0) };
        assert_eq!(zero.evaluate(&[3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn factorized_dimension_error() {
        let h = FactorizedClassifier { alpha: 1.0, votes: vec![1, -1], stump: Stump::new(3, 0.0) };
        assert!(matches!(h.evaluate(&[0.0, 1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn empty_strong_classifier_predicts_first_class() {
        let f = StrongClassifier::new(3, 2, ModelMeta::default());
        let (scores, label) = f.evaluate(&[0.0, 0.0]).unwrap();
        assert_eq!(scores, vec![0.0, 0.0, 0.0]);
        assert_eq!(label, 0);
    }

    #[test]
    fn duplicate_stages_double_scores() {
        let h = FactorizedClassifier {
            alpha: 0.5 * 3.0f64.ln(),
            votes: vec![-1, 1],
            stump: Stump::new(0, 0.5),
        };
        let mut f = StrongClassifier::new(2, 1, ModelMeta::default());
        f.push(BaseClassifier::Stump(h.clone()));
        let (s1, l1) = f.evaluate(&[2.0]).unwrap();
        f.push(BaseClassifier::Stump(h));
        let (s2, l2) = f.evaluate(&[2.0]).unwrap();
        assert_eq!(l1, l2);
        assert_eq!(l1, 1);
        for (a, b) in s1.iter().zip(&s2) {
            assert!((2.0 * a - b).abs() < 1e-15);
        }
    }
}
