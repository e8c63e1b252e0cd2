//! Empirical Rademacher complexity
//! `(2/m) E_σ[ sup_h |Σ_i σ_i h(x_i)| ]`, keeping the absolute value.
//!
//! The supremum has a closed form for each supported class:
//! thresholds scan prefix/suffix sums, the linear unit ball gives
//! `|Σ σ_i x_i|`, and the RKHS unit ball gives `sqrt(σ^T K σ)`.
//! The expectation over σ is enumerated exactly for `m <= 20` and estimated by
//! Monte Carlo otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_matrix, norm, SymMatrix};
use crate::model::HypothesisSpec;

pub const EXACT_ENUMERATION_LIMIT: usize = 20;
pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    pub value: f64,
    /// Zero for exact enumeration.
    pub std_error: f64,
    /// Number of σ patterns averaged.
    pub trials: usize,
    pub exact: bool,
}

enum Supremum {
    /// Group index per point (sorted distinct values) and group count.
    Threshold { group: Vec<usize>, groups: usize },
    Linear { points: Vec<Vec<f64>> },
    Kernel { gram: SymMatrix },
}

impl Supremum {
    fn build(h: &HypothesisSpec, points: &[Vec<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySupport);
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: points.iter().map(Vec::len).find(|&d| d != dim).unwrap_or(dim),
            });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample points"));
        }
        h.check_dim(dim)?;
        Ok(match h {
            HypothesisSpec::Threshold1D => {
                let mut order: Vec<usize> = (0..points.len()).collect();
                order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
                let mut group = vec![0; points.len()];
                let mut g = 0;
                for (rank, &i) in order.iter().enumerate() {
                    if rank > 0 && points[i][0] != points[order[rank - 1]][0] {
                        g += 1;
                    }
                    group[i] = g;
                }
                Supremum::Threshold { group, groups: g + 1 }
            }
            HypothesisSpec::LinearBounded { .. } => Supremum::Linear {
                points: points.to_vec(),
            },
            HypothesisSpec::KernelBounded { kernel } => Supremum::Kernel {
                gram: gram_matrix(points, kernel)?,
            },
        })
    }

    fn eval(&self, sigma: &[f64], scratch: &mut Vec<f64>) -> f64 {
        match self {
            Supremum::Threshold { group, groups } => {
                scratch.clear();
                scratch.resize(*groups, 0.0);
                for (s, g) in sigma.iter().zip(group) {
                    scratch[*g] += s;
                }
                let total: f64 = scratch.iter().sum();
                let mut best = total.abs();
                let mut prefix = 0.0;
                for v in scratch.iter() {
                    prefix += v;
                    best = best.max(prefix.abs()).max((total - prefix).abs());
                }
                best
            }
            Supremum::Linear { points } => {
                scratch.clear();
                scratch.resize(points[0].len(), 0.0);
                for (s, x) in sigma.iter().zip(points) {
                    for (a, b) in scratch.iter_mut().zip(x) {
                        *a += s * b;
                    }
                }
                norm(scratch)
            }
            Supremum::Kernel { gram } => gram.quad_form(sigma).max(0.0).sqrt(),
        }
    }
}

/// Exact expectation over all `2^m` sign patterns.
pub fn rademacher_exact(h: &HypothesisSpec, points: &[Vec<f64>]) -> Result<RademacherEstimate> {
    let m = points.len();
    if m > EXACT_ENUMERATION_LIMIT {
        return Err(Error::CombinatorialBlowup {
            size: m,
            limit: EXACT_ENUMERATION_LIMIT,
        });
    }
    let sup = Supremum::build(h, points)?;
    let patterns = 1u64 << m;
    // Split the pattern space into chunks; summing chunk totals in order keeps
    // the result independent of thread scheduling.
    let chunk = 1u64 << m.saturating_sub(6);
    let partials: Vec<f64> = (0..patterns.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut sigma = vec![0.0; m];
            let mut scratch = Vec::new();
            let mut s = 0.0;
            for bits in c * chunk..((c + 1) * chunk).min(patterns) {
                for (i, v) in sigma.iter_mut().enumerate() {
                    *v = if bits >> i & 1 == 1 { 1.0 } else { -1.0 };
                }
                s += sup.eval(&sigma, &mut scratch);
            }
            s
        })
        .collect();
    let mean = partials.iter().sum::<f64>() / patterns as f64;
    Ok(RademacherEstimate {
        value: 2.0 / m as f64 * mean,
        std_error: 0.0,
        trials: patterns as usize,
        exact: true,
    })
}

/// Monte Carlo estimate; trial `t` draws its signs from a generator seeded with
/// `seed + t`, so the estimate is bit-stable for a given `(seed, trials)`.
pub fn rademacher_montecarlo(
    h: &HypothesisSpec,
    points: &[Vec<f64>],
    trials: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let sup = Supremum::build(h, points)?;
    let m = points.len();
    let scale = 2.0 / m as f64;
    let draws: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t));
            let sigma: Vec<f64> = (0..m)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            scale * sup.eval(&sigma, &mut Vec::new())
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / trials as f64;
    let std_error = if trials > 1 {
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        (var / trials as f64).sqrt()
    } else {
        0.0
    };
    Ok(RademacherEstimate {
        value: mean,
        std_error,
        trials,
        exact: false,
    })
}

/// Exact for `m <= 20`, Monte Carlo otherwise.
pub fn rademacher(h: &HypothesisSpec, points: &[Vec<f64>], trials: usize, seed: u64) -> Result<RademacherEstimate> {
    if points.len() <= EXACT_ENUMERATION_LIMIT {
        rademacher_exact(h, points)
    } else {
        rademacher_montecarlo(h, points, trials, seed)
    }
}

/// Threshold-class complexity of a 1D sample.
pub fn rademacher_threshold1d(xs: &[f64], trials: usize, seed: u64) -> Result<RademacherEstimate> {
    let points: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    rademacher(&HypothesisSpec::Threshold1D, &points, trials, seed)
}
