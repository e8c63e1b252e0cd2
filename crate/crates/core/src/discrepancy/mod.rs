//! Distances between empirical distributions.
//!
//! The discrepancy distance between `Q` and `P` for a loss `L` and class `H` is
//! `max_{h, h' in H} |L_Q(h', h) - L_P(h', h)|`. Each concrete estimator is a
//! [`DiscrepancyEstimator`] and can be looked up by name in an
//! [`EstimatorRegistry`].

mod bounds;
mod l2;
mod rademacher;
mod zero_one;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use bounds::{bound_value, BoundFormula, BoundInputs, BoundRegistry, BoundReport};
pub use l2::{disc_l2_kernel, disc_l2_kernel_gram, disc_l2_linear, second_moment_difference};
pub use rademacher::{
    rademacher, rademacher_exact, rademacher_montecarlo, rademacher_threshold1d, RademacherEstimate,
    DEFAULT_TRIALS, EXACT_ENUMERATION_LIMIT,
};
pub use zero_one::{disc_01_bruteforce, disc_01_threshold1d, is_interval_trace, DEFAULT_MAX_SUPPORT};

use crate::error::{Error, Result};
use crate::linalg::Kernel;
use crate::model::{HypothesisSpec, JointSupport, WeightedEmpirical};

/// What realizes the maximum in a discrepancy computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The half-open interval `(lower, upper]`; `lower = None` means `-inf`.
    Interval { lower: Option<f64>, upper: f64 },
    /// An explicit subset of the joint support.
    Region { points: Vec<Vec<f64>> },
    /// Direction `u` with `|u| <= 2` maximizing `|u^T M u|`. For kernel
    /// estimators the coordinates are in the span of the joint support.
    Direction { u: Vec<f64> },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyResult {
    pub value: f64,
    pub witness: Witness,
}

/// `Σ_x |Q(x) - P(x)|` over the union of supports.
pub fn l1_distance(q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<f64> {
    let joint = JointSupport::new(q, p)?;
    Ok(joint.signed_mass().iter().map(|d| d.abs()).sum())
}

/// A way of measuring the distance between two empirical distributions.
pub trait DiscrepancyEstimator: Send + Sync {
    fn name(&self) -> &str;

    fn estimate(&self, q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<DiscrepancyResult>;
}

/// Construction parameters handed to estimator factories.
#[derive(Debug, Clone)]
pub struct EstimatorParams {
    pub kernel: Kernel,
    pub max_support: usize,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            kernel: Kernel::Linear,
            max_support: DEFAULT_MAX_SUPPORT,
        }
    }
}

struct L1;

impl DiscrepancyEstimator for L1 {
    fn name(&self) -> &str {
        "l1"
    }

    fn estimate(&self, q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<DiscrepancyResult> {
        Ok(DiscrepancyResult {
            value: l1_distance(q, p)?,
            witness: Witness::None,
        })
    }
}

struct Threshold1d;

impl DiscrepancyEstimator for Threshold1d {
    fn name(&self) -> &str {
        "threshold1d"
    }

    fn estimate(&self, q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<DiscrepancyResult> {
        disc_01_threshold1d(q, p)
    }
}

struct BruteForce {
    name: &'static str,
    hypothesis: Option<HypothesisSpec>,
    max_support: usize,
}

impl DiscrepancyEstimator for BruteForce {
    fn name(&self) -> &str {
        self.name
    }

    fn estimate(&self, q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<DiscrepancyResult> {
        disc_01_bruteforce(q, p, self.hypothesis.as_ref(), self.max_support)
    }
}

struct L2Linear;

impl DiscrepancyEstimator for L2Linear {
    fn name(&self) -> &str {
        "l2-linear"
    }

    fn estimate(&self, q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<DiscrepancyResult> {
        disc_l2_linear(q, p)
    }
}

struct L2Kernel(Kernel);

impl DiscrepancyEstimator for L2Kernel {
    fn name(&self) -> &str {
        "l2-kernel"
    }

    fn estimate(&self, q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<DiscrepancyResult> {
        disc_l2_kernel(q, p, &self.0)
    }
}

type EstimatorFactory =
    Box<dyn Fn(&EstimatorParams) -> Result<Box<dyn DiscrepancyEstimator>> + Send + Sync>;

/// Name -> estimator factory.
pub struct EstimatorRegistry {
    factories: BTreeMap<String, EstimatorFactory>,
}

impl EstimatorRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// `l1`, `threshold1d`, `bruteforce-intervals`, `bruteforce-subsets`,
    /// `l2-linear`, `l2-kernel`.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("l1", Box::new(|_| Ok(Box::new(L1))));
        reg.register("threshold1d", Box::new(|_| Ok(Box::new(Threshold1d))));
        reg.register(
            "bruteforce-intervals",
            Box::new(|p| {
                Ok(Box::new(BruteForce {
                    name: "bruteforce-intervals",
                    hypothesis: Some(HypothesisSpec::Threshold1D),
                    max_support: p.max_support,
                }))
            }),
        );
        reg.register(
            "bruteforce-subsets",
            Box::new(|p| {
                Ok(Box::new(BruteForce {
                    name: "bruteforce-subsets",
                    hypothesis: None,
                    max_support: p.max_support,
                }))
            }),
        );
        reg.register("l2-linear", Box::new(|_| Ok(Box::new(L2Linear))));
        reg.register(
            "l2-kernel",
            Box::new(|p| {
                p.kernel.validate()?;
                Ok(Box::new(L2Kernel(p.kernel)))
            }),
        );
        reg
    }

    pub fn register(&mut self, name: &str, factory: EstimatorFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn create(&self, name: &str, params: &EstimatorParams) -> Result<Box<dyn DiscrepancyEstimator>> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| Error::Unsupported(format!("no discrepancy estimator named `{name}`")))?;
        factory(params)
    }

    /// Default estimator name for a (loss, hypothesis) pair as spelled on the
    /// command line.
    pub fn resolve(loss: &str, hypothesis: &str) -> Result<&'static str> {
        match (loss, hypothesis) {
            ("zeroone", "threshold1d") => Ok("threshold1d"),
            ("l2", "linear") => Ok("l2-linear"),
            ("l2", "kernel") => Ok("l2-kernel"),
            _ => Err(Error::Unsupported(format!(
                "no discrepancy estimator for loss `{loss}` with hypothesis `{hypothesis}`"
            ))),
        }
    }
}

impl Default for EstimatorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}
