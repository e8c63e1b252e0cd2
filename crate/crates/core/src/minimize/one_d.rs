//! Exact discrepancy minimization for thresholds on the line.

use crate::discrepancy::disc_01_threshold1d;
use crate::error::{Error, Result};
use crate::model::{JointSupport, SimplexVector, WeightedEmpirical};

use super::ReweightResult;

/// Target mass of each maximal run of target-only points.
struct Gaps {
    /// Mass strictly between consecutive source points.
    internal: Vec<f64>,
    left: f64,
    right: f64,
}

fn gaps(joint: &JointSupport) -> Gaps {
    let mut internal = Vec::new();
    let mut left = 0.0;
    let mut current: Option<f64> = None;
    for (k, src) in joint.source_index.iter().enumerate() {
        match (src, current.as_mut()) {
            (Some(_), None) => current = Some(0.0),
            (Some(_), Some(run)) => {
                internal.push(*run);
                *run = 0.0;
            }
            (None, None) => left += joint.p[k],
            (None, Some(run)) => *run += joint.p[k],
        }
    }
    Gaps {
        internal,
        left,
        right: current.unwrap_or(0.0),
    }
}

/// Largest target mass of a region containing no source point: a gap between
/// consecutive source points, or the two tails together (the complement of
/// `[s_1, s_m]`).
pub fn unlabeled_lower_bound(q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<f64> {
    let joint = JointSupport::sorted_1d(q, p)?;
    let g = gaps(&joint);
    Ok(g.internal.iter().copied().fold(g.left + g.right, f64::max))
}

/// Each source point receives the target mass at its own location plus the
/// mass of the target-only run to its right; the rightmost source point also
/// receives the mass left of the first source point, so the two tails act as
/// one region.
///
/// The achieved discrepancy meets [`unlabeled_lower_bound`], so the returned
/// weights are optimal.
pub fn minimize_1d(q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<ReweightResult> {
    if q.is_empty() {
        return Err(Error::EmptySupport);
    }
    let joint = JointSupport::sorted_1d(q, p)?;
    let mut z = vec![0.0; q.len()];
    let mut left = 0.0;
    let mut owner: Option<usize> = None;
    for (k, src) in joint.source_index.iter().enumerate() {
        if let Some(i) = src {
            owner = Some(*i);
        }
        match owner {
            Some(i) => z[i] += joint.p[k],
            None => left += joint.p[k],
        }
    }
    let last = owner.ok_or(Error::EmptySupport)?;
    z[last] += left;

    let mut flags = Vec::new();
    if left > 0.0 {
        flags.push("target mass left of the first source point assigned to the last source point".to_string());
    }
    let weights = SimplexVector::from_unnormalized(z)?;
    let reweighted = q.reweighted(weights.as_slice())?;
    let achieved_disc = disc_01_threshold1d(&reweighted, p)?.value;
    let g = gaps(&joint);
    let lower_bound = g.internal.iter().copied().fold(g.left + g.right, f64::max);
    Ok(ReweightResult {
        weights,
        achieved_disc,
        lower_bound,
        trace: Vec::new(),
        converged: true,
        flags,
    })
}
