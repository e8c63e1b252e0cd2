//! Empirical check of the pointwise stability of kernel ridge regression
//! under a change of training distribution.
//!
//! `h` is trained on `Q̂` with labels `f_Q`, `h'` on `P̂` with labels `f_P`, and
//! the largest observed `|(h'(x) - y)^2 - (h(x) - y)^2|` over a probe sample is
//! compared with the bound implied by the square-loss discrepancy.
//!
//! The discrepancy is taken over the RKHS ball of radius
//! `R = max(||h||, ||h'||, ||g||)`, where `g ∈ H` stands in for `f_P`: the
//! difference of any two members lies in the ball of radius `2R`, so
//! `disc = 4 R^2 ||K^{1/2} diag(P - Q) K^{1/2}||_2` over the joint support.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrepancy::disc_l2_kernel_gram;
use crate::error::{Error, Result};
use crate::linalg::{gram_matrix, jacobi_eigen, Kernel, SymMatrix};
use crate::model::{JointSupport, LabeledSample, SimplexVector, WeightedEmpirical};

use super::krr::{train_weighted_krr_gram, KernelHypothesis};
use super::check_lambda;

/// Relative residual under which `f_P` counts as a member of the RKHS on the
/// joint support.
const INTERPOLATION_TOL: f64 = 1e-8;
/// Eigenvalues below this fraction of the largest are treated as zero.
const PINV_CUTOFF: f64 = 1e-10;
/// Absolute and relative slack allowed before a bound counts as violated.
pub const SATISFIED_SLACK: f64 = 1e-9;

pub type Labeling<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityBranch {
    /// `f_P` lies in `H` and agrees with `f_Q` on the source support.
    SameLabels,
    /// `f_P` lies in `H`; `δ^2 = L_Q̂(f_Q, f_P)`.
    LabelGap,
    /// `f_P` replaced by `g ∈ H` with
    /// `δ' = sqrt(L_Q̂(g, f_Q)) + sqrt(L_P̂(g, f_P))`.
    Substitute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetStandIn {
    /// Minimum-norm interpolant of `f_P` on the joint support.
    Interpolant,
    /// The hypothesis trained on `P̂`.
    TargetHypothesis,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub observed_max: f64,
    pub bound_value: f64,
    pub satisfied: bool,
    pub branch: StabilityBranch,
    pub stand_in: TargetStandIn,
    pub disc: f64,
    pub radius: f64,
    pub kappa: f64,
    /// `M`: bound on `|h(x)|`, `|h'(x)|` and `|y|` over the probes.
    pub loss_bound: f64,
    pub sigma: f64,
    /// `δ` or `δ'`, zero on the same-labels branch.
    pub label_gap: f64,
    pub source_hypothesis: KernelHypothesis,
    pub target_hypothesis: KernelHypothesis,
}

pub struct StabilityProblem<'a> {
    pub source: &'a WeightedEmpirical,
    pub target: &'a WeightedEmpirical,
    /// `f_Q`, evaluated on the source support.
    pub source_labels: Labeling<'a>,
    /// `f_P`, evaluated on the joint support.
    pub target_labels: Labeling<'a>,
    pub kernel: Kernel,
    pub lambda: f64,
}

struct StandIn {
    kind: TargetStandIn,
    /// `g` on the joint support.
    values: Vec<f64>,
    norm: f64,
    /// `g` reproduces `f_P` on the joint support.
    exact: bool,
}

fn sub_gram(gram: &SymMatrix, idx: &[usize]) -> SymMatrix {
    let rows: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| gram.get(i, j)).collect()).collect();
    SymMatrix::from_rows(&rows).expect("principal submatrix of a symmetric matrix")
}

fn interpolant(gram: &SymMatrix, f: &[f64]) -> Result<StandIn> {
    let eig = jacobi_eigen(gram)?;
    let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let mut alpha = vec![0.0; f.len()];
    let mut norm_sq = 0.0;
    for (lam, v) in eig.values.iter().zip(&eig.vectors) {
        if *lam <= PINV_CUTOFF * top {
            continue;
        }
        let c: f64 = v.iter().zip(f).map(|(a, b)| a * b).sum();
        norm_sq += c * c / lam;
        for (a, vi) in alpha.iter_mut().zip(v) {
            *a += c / lam * vi;
        }
    }
    let values = gram.mul_vec(&alpha);
    let scale = f.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let residual = values.iter().zip(f).fold(0.0_f64, |m, (g, y)| m.max((g - y).abs()));
    Ok(StandIn {
        kind: TargetStandIn::Interpolant,
        values,
        norm: norm_sq.sqrt(),
        exact: residual <= INTERPOLATION_TOL * scale,
    })
}

fn weighted_l2(weights: &[f64], a: &[f64], b: &[f64]) -> f64 {
    weights.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * (x - y).powi(2)).sum()
}

/// Runs the check on `probes`; each probe pairs a point with the label used in
/// the loss.
pub fn verify_stability_bound(problem: &StabilityProblem, probes: &LabeledSample) -> Result<StabilityReport> {
    if probes.is_empty() {
        return Err(Error::param("probes", "at least one probe point is required"));
    }
    check_lambda(problem.lambda)?;
    problem.kernel.validate()?;
    let (q, p) = (problem.source, problem.target);
    let joint = JointSupport::new(q, p)?;
    if probes.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            found: probes.dim(),
        });
    }
    let gram = gram_matrix(&joint.points, &problem.kernel)?;
    let m0 = q.len();
    let f_q: Vec<f64> = q.points().iter().map(|x| (problem.source_labels)(x)).collect();
    let f_p: Vec<f64> = joint.points.iter().map(|x| (problem.target_labels)(x)).collect();
    if f_q.iter().chain(&f_p).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("labels"));
    }

    // P̂'s own points within the joint support
    let p_idx: Vec<usize> = p
        .points()
        .iter()
        .map(|x| {
            joint
                .points
                .iter()
                .position(|y| y == x)
                .expect("target point belongs to the joint support")
        })
        .collect();
    let q_idx: Vec<usize> = (0..m0).collect();

    let source_sample = LabeledSample::new(q.points().to_vec(), f_q.clone())?;
    let target_sample = LabeledSample::new(p.points().to_vec(), p_idx.iter().map(|&i| f_p[i]).collect())?;
    let h = train_weighted_krr_gram(
        &source_sample,
        &SimplexVector::new(q.weights().to_vec())?,
        &sub_gram(&gram, &q_idx),
        &problem.kernel,
        problem.lambda,
    )?;
    let h_prime = train_weighted_krr_gram(
        &target_sample,
        &SimplexVector::new(p.weights().to_vec())?,
        &sub_gram(&gram, &p_idx),
        &problem.kernel,
        problem.lambda,
    )?;
    let (h_norm, h_prime_norm) = (h.rkhs_norm(), h_prime.rkhs_norm());

    let kappa = joint
        .points
        .iter()
        .chain(probes.points())
        .map(|x| problem.kernel.eval(x, x))
        .fold(0.0_f64, f64::max)
        .sqrt();
    let max_label = probes.labels().iter().fold(0.0_f64, |m, y| m.max(y.abs()));
    let loss_bound = max_label.max(kappa * h_norm.max(h_prime_norm));
    let sigma = 4.0 * loss_bound;
    let unit_disc = disc_l2_kernel_gram(&joint.q, &joint.p, &gram)?.value;
    let lambda = problem.lambda;

    let h_prime_values: Vec<f64> = joint.points.iter().map(|x| h_prime.predict(x)).collect();
    let candidates = [
        interpolant(&gram, &f_p)?,
        StandIn {
            kind: TargetStandIn::TargetHypothesis,
            values: h_prime_values,
            norm: h_prime_norm,
            exact: false,
        },
    ];

    let mut best: Option<(f64, StabilityBranch, TargetStandIn, f64, f64, f64)> = None;
    for g in &candidates {
        let radius = h_norm.max(h_prime_norm).max(g.norm);
        let disc = radius * radius * unit_disc;
        let (branch, gap) = if g.exact {
            let gap_sq = weighted_l2(q.weights(), &f_q, &f_p[..m0]);
            if gap_sq == 0.0 {
                (StabilityBranch::SameLabels, 0.0)
            } else {
                (StabilityBranch::LabelGap, gap_sq.sqrt())
            }
        } else {
            let to_source = weighted_l2(q.weights(), &g.values[..m0], &f_q).sqrt();
            let to_target = weighted_l2(&joint.p, &g.values, &f_p).sqrt();
            (StabilityBranch::Substitute, to_source + to_target)
        };
        let bound = match branch {
            StabilityBranch::SameLabels => kappa * sigma * (disc / lambda).sqrt(),
            _ => {
                let kd = kappa * gap;
                (2.0 * kappa * loss_bound / lambda) * (kd + (kd * kd + 4.0 * lambda * disc).sqrt())
            }
        };
        if best.as_ref().is_none_or(|b| bound < b.0) {
            best = Some((bound, branch, g.kind, disc, radius, gap));
        }
    }
    let (bound_value, branch, stand_in, disc, radius, label_gap) = best.expect("two candidates");

    let observed_max = probes
        .points()
        .par_iter()
        .zip(probes.labels())
        .map(|(x, y)| ((h_prime.predict(x) - y).powi(2) - (h.predict(x) - y).powi(2)).abs())
        .reduce(|| 0.0, f64::max);
    if !(observed_max.is_finite() && bound_value.is_finite()) {
        return Err(Error::NonFinite("stability check"));
    }
    let satisfied = observed_max <= bound_value + SATISFIED_SLACK * (1.0 + bound_value);
    Ok(StabilityReport {
        observed_max,
        bound_value,
        satisfied,
        branch,
        stand_in,
        disc,
        radius,
        kappa,
        loss_bound,
        sigma,
        label_gap,
        source_hypothesis: h,
        target_hypothesis: h_prime,
    })
}
