//! Weighted learners: threshold ERM for classification on the line, ridge and
//! kernel ridge regression for the square loss, and a stability check that
//! compares kernel ridge predictors trained on two distributions.
//!
//! The experiments select learners by name through [`LearnerRegistry`].

mod krr;
mod ridge;
mod stability;
mod threshold;

use std::collections::BTreeMap;

pub use krr::{
    krr_objective, primal_weights, train_weighted_krr, train_weighted_krr_gram, KernelHypothesis, ILL_CONDITIONED,
};
pub use ridge::{ridge_objective, train_weighted_ridge, LinearHypothesis};
pub use stability::{
    verify_stability_bound, Labeling, StabilityBranch, StabilityProblem, StabilityReport, TargetStandIn,
    SATISFIED_SLACK,
};
pub use threshold::{train_weighted_threshold, weighted_error, Orientation, ThresholdHypothesis};

use crate::error::{Error, Result};
use crate::linalg::Kernel;
use crate::model::{LabeledSample, SimplexVector};

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", "must be positive and finite"));
    }
    Ok(())
}

pub(crate) fn check_weights(sample: &LabeledSample, weights: &SimplexVector) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::EmptySupport);
    }
    if weights.len() != sample.len() {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: sample.len(),
            found: weights.len(),
        });
    }
    Ok(())
}

/// A trained predictor.
pub trait Predictor: Send + Sync {
    fn predict(&self, x: &[f64]) -> f64;
}

impl Predictor for ThresholdHypothesis {
    fn predict(&self, x: &[f64]) -> f64 {
        ThresholdHypothesis::predict(self, x[0])
    }
}

impl Predictor for LinearHypothesis {
    fn predict(&self, x: &[f64]) -> f64 {
        LinearHypothesis::predict(self, x)
    }
}

impl Predictor for KernelHypothesis {
    fn predict(&self, x: &[f64]) -> f64 {
        KernelHypothesis::predict(self, x)
    }
}

/// Training procedure for a weighted sample.
pub trait WeightedLearner: Send + Sync {
    fn name(&self) -> &str;

    fn fit(&self, sample: &LabeledSample, weights: &SimplexVector) -> Result<Box<dyn Predictor>>;
}

struct ThresholdLearner;

impl WeightedLearner for ThresholdLearner {
    fn name(&self) -> &str {
        "threshold"
    }

    fn fit(&self, sample: &LabeledSample, weights: &SimplexVector) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(train_weighted_threshold(sample, weights)?))
    }
}

struct RidgeLearner {
    lambda: f64,
}

impl WeightedLearner for RidgeLearner {
    fn name(&self) -> &str {
        "ridge"
    }

    fn fit(&self, sample: &LabeledSample, weights: &SimplexVector) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(train_weighted_ridge(sample, weights, self.lambda)?))
    }
}

struct KrrLearner {
    kernel: Kernel,
    lambda: f64,
}

impl WeightedLearner for KrrLearner {
    fn name(&self) -> &str {
        "krr"
    }

    fn fit(&self, sample: &LabeledSample, weights: &SimplexVector) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(train_weighted_krr(sample, weights, &self.kernel, self.lambda)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerParams {
    pub lambda: f64,
    pub kernel: Kernel,
}

impl Default for LearnerParams {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            kernel: Kernel::Linear,
        }
    }
}

type LearnerFactory = Box<dyn Fn(&LearnerParams) -> Result<Box<dyn WeightedLearner>> + Send + Sync>;

/// Name -> learner.
pub struct LearnerRegistry {
    factories: BTreeMap<String, LearnerFactory>,
}

impl LearnerRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("threshold", Box::new(|_| Ok(Box::new(ThresholdLearner))));
        reg.register(
            "ridge",
            Box::new(|p| {
                check_lambda(p.lambda)?;
                Ok(Box::new(RidgeLearner { lambda: p.lambda }))
            }),
        );
        reg.register(
            "krr",
            Box::new(|p| {
                check_lambda(p.lambda)?;
                p.kernel.validate()?;
                Ok(Box::new(KrrLearner {
                    kernel: p.kernel,
                    lambda: p.lambda,
                }))
            }),
        );
        reg
    }

    pub fn register(&mut self, name: &str, factory: LearnerFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn create(&self, name: &str, params: &LearnerParams) -> Result<Box<dyn WeightedLearner>> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| Error::Unsupported(format!("no learner named `{name}`")))?;
        factory(params)
    }
}

impl Default for LearnerRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_learners_fit() {
        let reg = LearnerRegistry::with_builtins();
        assert_eq!(reg.names().collect::<Vec<_>>(), ["krr", "ridge", "threshold"]);
        let s = LabeledSample::from_scalars(&[0.0, 1.0, 2.0], &[0.0, 1.0, 1.0]).unwrap();
        let w = SimplexVector::uniform(3).unwrap();
        for name in ["threshold", "ridge", "krr"] {
            let h = reg.create(name, &LearnerParams::default()).unwrap().fit(&s, &w).unwrap();
            assert!(h.predict(&[1.5]).is_finite());
        }
        let bad = LearnerParams {
            lambda: -1.0,
            ..LearnerParams::default()
        };
        assert!(reg.create("ridge", &bad).is_err());
        assert!(reg.create("svm", &LearnerParams::default()).is_err());
    }

    #[test]
    fn zero_labels_give_zero_predictors() {
        let s = LabeledSample::new(vec![vec![1.0, 2.0], vec![-1.0, 0.5]], vec![0.0, 0.0]).unwrap();
        let w = SimplexVector::uniform(2).unwrap();
        assert_eq!(train_weighted_ridge(&s, &w, 0.3).unwrap().w, vec![0.0, 0.0]);
        let h = train_weighted_krr(&s, &w, &Kernel::Gaussian { gamma: 1.0 }, 0.3).unwrap();
        assert_eq!(h.alpha, vec![0.0, 0.0]);
    }

    #[test]
    fn single_point_ridge() {
        let s = LabeledSample::new(vec![vec![1.0, 0.0, 0.0]], vec![1.0]).unwrap();
        let h = train_weighted_ridge(&s, &SimplexVector::uniform(1).unwrap(), 1.0).unwrap();
        assert!((h.w[0] - 0.5).abs() < 1e-15);
        assert_eq!(&h.w[1..], &[0.0, 0.0]);
    }

    #[test]
    fn ridge_shrinks_with_lambda() {
        let s = LabeledSample::new(
            vec![vec![1.0, 0.3], vec![-0.5, 2.0], vec![0.2, -1.0]],
            vec![1.0, -2.0, 0.7],
        )
        .unwrap();
        let w = SimplexVector::uniform(3).unwrap();
        let norms: Vec<f64> = [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e4]
            .iter()
            .map(|&l| train_weighted_ridge(&s, &w, l).unwrap().norm())
            .collect();
        assert!(norms.windows(2).all(|p| p[1] < p[0]), "{norms:?}");
        assert!(norms[6] < 1e-3);
    }

    #[test]
    fn replicated_points_match_rational_weights() {
        // weights (1/2, 1/3, 1/6) against a sample holding 3, 2 and 1 copies
        let xs = [[0.5, -1.0], [1.5, 0.25], [-0.75, 2.0]];
        let ys = [0.3, -1.2, 2.2];
        let s = LabeledSample::new(xs.iter().map(|x| x.to_vec()).collect(), ys.to_vec()).unwrap();
        let w = SimplexVector::new(vec![0.5, 1.0 / 3.0, 1.0 / 6.0]).unwrap();
        let copies = [3, 2, 1];
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for ((x, y), c) in xs.iter().zip(ys).zip(copies) {
            for _ in 0..c {
                pts.push(x.to_vec());
                labels.push(y);
            }
        }
        let replicated = LabeledSample::new(pts, labels).unwrap();
        let u = SimplexVector::uniform(6).unwrap();
        let probe = [0.1, 0.9];
        let a = train_weighted_ridge(&s, &w, 0.2).unwrap();
        let b = train_weighted_ridge(&replicated, &u, 0.2).unwrap();
        assert!((a.predict(&probe) - b.predict(&probe)).abs() <= 1e-8);
        let k = Kernel::Gaussian { gamma: 0.7 };
        let a = train_weighted_krr(&s, &w, &k, 0.2).unwrap();
        let b = train_weighted_krr(&replicated, &u, &k, 0.2).unwrap();
        assert!((a.predict(&probe) - b.predict(&probe)).abs() <= 1e-8);
    }
}
