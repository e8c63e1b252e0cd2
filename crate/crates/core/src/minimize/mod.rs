//! Reweighting of a source sample to minimize its empirical discrepancy to a
//! target sample.
//!
//! Every method implements [`Reweighter`] and is registered by name in a
//! [`ReweighterRegistry`]: `1d` (exact gap-mass rule for thresholds), `lp`
//! (0-1 loss linear program over canonical 1D regions), `l2-linear` and
//! `l2-kernel` (mirror descent on the spectral norm).

mod grid;
mod lp;
mod mirror;
mod one_d;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use grid::{grid_oracle, GRID_MAX_DIM};
pub use lp::{canonical_regions_1d, minimize_01_lp, minimize_01_lp_1d, solve_lp, Constraint, LpSolution, Relation};
pub use mirror::{kernel_family, linear_family, minimize_family, minimize_l2_kernel, minimize_l2_linear};
pub use one_d::{minimize_1d, unlabeled_lower_bound};

use crate::error::{Error, Result};
use crate::linalg::{gram_matrix, Kernel};
use crate::model::{JointSupport, SimplexVector, WeightedEmpirical};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReweightResult {
    /// Weights over the source support, in source order.
    pub weights: SimplexVector,
    pub achieved_disc: f64,
    pub lower_bound: f64,
    /// Best objective so far after each iteration (iterative solvers only).
    pub trace: Vec<f64>,
    pub converged: bool,
    pub flags: Vec<String>,
}

/// First-order method used by the spectral-norm minimizers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstOrderMethod {
    /// Extragradient steps on the saddle form, entropic on both sides.
    #[default]
    MirrorProx,
    /// Entropic mirror descent with eigenvector subgradients.
    Subgradient,
}

impl std::str::FromStr for FirstOrderMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mirror-prox" => Ok(Self::MirrorProx),
            "subgradient" => Ok(Self::Subgradient),
            _ => Err(Error::param("method", format!("unknown first-order method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub eta0: f64,
    pub tol: f64,
    pub seed: u64,
    pub method: FirstOrderMethod,
    /// Starting weights; uniform when absent.
    pub warm_start: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            eta0: 1.0,
            tol: 1e-6,
            seed: 0,
            method: FirstOrderMethod::default(),
            warm_start: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return Err(Error::param("eta0", "must be positive"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::param("tol", "must be positive"));
        }
        Ok(())
    }
}

pub trait Reweighter: Send + Sync {
    fn name(&self) -> &str;

    fn reweight(&self, q: &WeightedEmpirical, p: &WeightedEmpirical, cfg: &SolverConfig) -> Result<ReweightResult>;
}

struct OneD;

impl Reweighter for OneD {
    fn name(&self) -> &str {
        "1d"
    }

    fn reweight(&self, q: &WeightedEmpirical, p: &WeightedEmpirical, _: &SolverConfig) -> Result<ReweightResult> {
        minimize_1d(q, p)
    }
}

struct Lp;

impl Reweighter for Lp {
    fn name(&self) -> &str {
        "lp"
    }

    fn reweight(&self, q: &WeightedEmpirical, p: &WeightedEmpirical, _: &SolverConfig) -> Result<ReweightResult> {
        minimize_01_lp_1d(q, p)
    }
}

struct L2Linear;

impl Reweighter for L2Linear {
    fn name(&self) -> &str {
        "l2-linear"
    }

    fn reweight(&self, q: &WeightedEmpirical, p: &WeightedEmpirical, cfg: &SolverConfig) -> Result<ReweightResult> {
        minimize_l2_linear(q, p, cfg)
    }
}

struct L2Kernel(Kernel);

impl Reweighter for L2Kernel {
    fn name(&self) -> &str {
        "l2-kernel"
    }

    fn reweight(&self, q: &WeightedEmpirical, p: &WeightedEmpirical, cfg: &SolverConfig) -> Result<ReweightResult> {
        let joint = JointSupport::new(q, p)?;
        let gram = gram_matrix(&joint.points, &self.0)?;
        minimize_l2_kernel(q, p, &gram, cfg)
    }
}

type ReweighterFactory = Box<dyn Fn(&Kernel) -> Result<Box<dyn Reweighter>> + Send + Sync>;

/// Name -> reweighting method.
pub struct ReweighterRegistry {
    factories: BTreeMap<String, ReweighterFactory>,
}

impl ReweighterRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("1d", Box::new(|_| Ok(Box::new(OneD))));
        reg.register("lp", Box::new(|_| Ok(Box::new(Lp))));
        reg.register("l2-linear", Box::new(|_| Ok(Box::new(L2Linear))));
        reg.register(
            "l2-kernel",
            Box::new(|k| {
                k.validate()?;
                Ok(Box::new(L2Kernel(*k)))
            }),
        );
        reg
    }

    pub fn register(&mut self, name: &str, factory: ReweighterFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn create(&self, name: &str, kernel: &Kernel) -> Result<Box<dyn Reweighter>> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| Error::Unsupported(format!("no reweighting method named `{name}`")))?;
        factory(kernel)
    }

    /// Default method for a (loss, hypothesis) pair as spelled on the command
    /// line.
    pub fn resolve(loss: &str, hypothesis: &str) -> Result<&'static str> {
        match (loss, hypothesis) {
            ("zeroone", "threshold1d") => Ok("1d"),
            ("l2", "linear") => Ok("l2-linear"),
            ("l2", "kernel") => Ok("l2-kernel"),
            _ => Err(Error::Unsupported(format!(
                "no reweighting method for loss `{loss}` with hypothesis `{hypothesis}`"
            ))),
        }
    }
}

impl Default for ReweighterRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

/// Source sample carrying the weights of a reweighting result.
pub fn apply_weights(q: &WeightedEmpirical, weights: &SimplexVector) -> Result<WeightedEmpirical> {
    q.reweighted(weights.as_slice())
}
