//! 0-1 loss discrepancy: exact interval scan for 1D thresholds and a
//! power-set oracle.

use crate::error::{Error, Result};
use crate::model::{HypothesisSpec, JointSupport, WeightedEmpirical};

use super::{DiscrepancyResult, Witness};

pub const DEFAULT_MAX_SUPPORT: usize = 16;

/// 0-1 discrepancy for prefix/suffix thresholds on the line.
///
/// `H∆H` is the family of intervals `(z1, z2]` and their complements; a
/// complement has the same `|Q(a) - P(a)|` as its interval, so only intervals
/// with endpoints on the sorted joint support are scanned. Ties keep the last
/// maximal interval in `(start, end)` lexicographic order.
pub fn disc_01_threshold1d(q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<DiscrepancyResult> {
    let joint = JointSupport::sorted_1d(q, p)?;
    let n = joint.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for d in joint.signed_mass() {
        acc += d;
        prefix.push(acc);
    }

    let mut best = (0.0f64, 0usize, 0usize);
    for i in 0..n {
        for j in i + 1..=n {
            let v = (prefix[j] - prefix[i]).abs();
            if v >= best.0 {
                best = (v, i, j);
            }
        }
    }
    let (value, i, j) = best;
    let lower = if i == 0 {
        None
    } else {
        Some(joint.points[i - 1][0])
    };
    Ok(DiscrepancyResult {
        value,
        witness: Witness::Interval {
            lower,
            upper: joint.points[j - 1][0],
        },
    })
}

/// True when `mask` (over `n` sorted points) is a nonempty run of
/// consecutive points or the complement of one.
pub fn is_interval_trace(mask: u64, n: usize) -> bool {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let contiguous = |m: u64| {
        if m == 0 {
            return false;
        }
        let shifted = m >> m.trailing_zeros();
        shifted & (shifted + 1) == 0
    };
    let mask = mask & full;
    mask != 0 && (contiguous(mask) || mask == full || contiguous(full & !mask))
}

/// Exhaustive `max_a |Q(a) - P(a)|` over subsets of the joint support.
///
/// With `Some(Threshold1D)` the candidate regions are restricted to traces of
/// intervals and their complements; with `None` (or any class whose
/// realizability is not decided here) every subset is a candidate.
pub fn disc_01_bruteforce(
    q: &WeightedEmpirical,
    p: &WeightedEmpirical,
    hypothesis: Option<&HypothesisSpec>,
    max_support: usize,
) -> Result<DiscrepancyResult> {
    let intervals_only = matches!(hypothesis, Some(HypothesisSpec::Threshold1D));
    let joint = if intervals_only {
        JointSupport::sorted_1d(q, p)?
    } else {
        JointSupport::new(q, p)?
    };
    let n = joint.len();
    let limit = max_support.min(30);
    if n > limit {
        return Err(Error::CombinatorialBlowup { size: n, limit });
    }
    let diff = joint.signed_mass();

    let mut best = (0.0f64, 0u64);
    for mask in 1u64..(1u64 << n) {
        if intervals_only && !is_interval_trace(mask, n) {
            continue;
        }
        let mut s = 0.0;
        for (k, d) in diff.iter().enumerate() {
            if mask >> k & 1 == 1 {
                s += d;
            }
        }
        if s.abs() > best.0 {
            best = (s.abs(), mask);
        }
    }
    let points = (0..n)
        .filter(|k| best.1 >> k & 1 == 1)
        .map(|k| joint.points[k].clone())
        .collect();
    Ok(DiscrepancyResult {
        value: best.0,
        witness: Witness::Region { points },
    })
}
