//! Square-loss discrepancy for norm-bounded linear and kernel classes.
//!
//! For `H = {x -> w.x : |w| <= 1}` the difference of two hypotheses ranges over
//! `|u| <= 2`, so `disc = max_{|u|<=2} |u^T M u| = 4 ||M||_2` with
//! `M = Σ_x (P(x) - Q(x)) x x^T`. The kernel version replaces `M` by
//! `K^{1/2} A K^{1/2}`, `A = diag(P - Q)` over the joint support, which has the
//! same nonzero spectrum.

use crate::error::{Error, Result};
use crate::linalg::{gram_matrix, psd_sqrt, spectral_abs_max, Kernel, SymMatrix};
use crate::model::{JointSupport, WeightedEmpirical};

use super::{DiscrepancyResult, Witness};

/// `Σ_x (P(x) - Q(x)) x x^T`.
pub fn second_moment_difference(q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<SymMatrix> {
    q.require_dim(p)?;
    let mut m = SymMatrix::zeros(q.dim());
    for (x, w) in p.points().iter().zip(p.weights()) {
        m.add_outer(*w, x);
    }
    for (x, w) in q.points().iter().zip(q.weights()) {
        m.add_outer(-*w, x);
    }
    Ok(m)
}

pub fn disc_l2_linear(q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<DiscrepancyResult> {
    let m = second_moment_difference(q, p)?;
    let s = spectral_abs_max(&m)?;
    Ok(DiscrepancyResult {
        value: 4.0 * s.value,
        witness: Witness::Direction {
            u: s.witness.iter().map(|v| 2.0 * v).collect(),
        },
    })
}

/// Kernel discrepancy from masses aligned with a Gram matrix.
pub fn disc_l2_kernel_gram(q_mass: &[f64], p_mass: &[f64], gram: &SymMatrix) -> Result<DiscrepancyResult> {
    let n = gram.order();
    for (what, v) in [("source masses", q_mass), ("target masses", p_mass)] {
        if v.len() != n {
            return Err(Error::LengthMismatch {
                what,
                expected: n,
                found: v.len(),
            });
        }
    }
    let root = psd_sqrt(gram)?;
    let a: Vec<f64> = p_mass.iter().zip(q_mass).map(|(p, q)| p - q).collect();
    let s = spectral_abs_max(&root.sandwich_diag(&a))?;
    Ok(DiscrepancyResult {
        value: 4.0 * s.value,
        witness: Witness::Direction {
            u: s.witness.iter().map(|v| 2.0 * v).collect(),
        },
    })
}

/// Kernel discrepancy with the Gram matrix built over the joint support
/// (source points first, then target-only points).
pub fn disc_l2_kernel(q: &WeightedEmpirical, p: &WeightedEmpirical, kernel: &Kernel) -> Result<DiscrepancyResult> {
    let joint = JointSupport::new(q, p)?;
    let gram = gram_matrix(&joint.points, kernel)?;
    disc_l2_kernel_gram(&joint.q, &joint.p, &gram)
}
