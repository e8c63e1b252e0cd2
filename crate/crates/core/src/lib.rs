//! Discrepancy distance between empirical distributions, reweighting of a
//! source sample to minimize it, and the learners and generalization bounds
//! that use the reweighted sample.
//!
//! - [`discrepancy`]: 0-1 loss discrepancy for thresholds on the line, square
//!   loss discrepancy for bounded linear and kernel classes, Rademacher
//!   complexity and a registry of named bounds.
//! - [`minimize`]: source reweightings that minimize those discrepancies.
//! - [`learners`]: weighted threshold, ridge and kernel ridge training.
//! - [`experiments`]: the shifted-Gaussian classification and regression runs.
//!
//! ```
//! use discadapt::{disc_01_threshold1d, minimize_1d, WeightedEmpirical};
//!
//! let q = WeightedEmpirical::uniform_scalars(&[0.1, 0.5]).unwrap();
//! let p = WeightedEmpirical::uniform_scalars(&[0.2, 0.3, 0.6]).unwrap();
//! let r = minimize_1d(&q, &p).unwrap();
//! let q2 = q.reweighted(r.weights.as_slice()).unwrap();
//! assert_eq!(disc_01_threshold1d(&q2, &p).unwrap().value, r.achieved_disc);
//! ```

pub mod discrepancy;
pub mod error;
pub mod experiments;
pub mod io;
pub mod learners;
pub mod linalg;
pub mod minimize;
pub mod model;

pub use discrepancy::{
    disc_01_bruteforce, disc_01_threshold1d, disc_l2_kernel, disc_l2_linear, DiscrepancyEstimator, DiscrepancyResult,
    EstimatorRegistry,
};
pub use error::{Error, Result};
pub use linalg::Kernel;
pub use minimize::{minimize_1d, minimize_l2_kernel, minimize_l2_linear, ReweightResult, ReweighterRegistry, SolverConfig};
pub use model::{HypothesisSpec, LabeledSample, SimplexVector, WeightedEmpirical};
