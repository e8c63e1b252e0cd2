use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_matrix, Cholesky, Kernel, SymMatrix};
use crate::model::{LabeledSample, SimplexVector};

use super::{check_lambda, check_weights};

/// Condition estimate above which a solve is flagged.
pub const ILL_CONDITIONED: f64 = 1e12;

/// `h(x) = Σ_i α_i k(x_i, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelHypothesis {
    pub alpha: Vec<f64>,
    pub kernel: Kernel,
    pub points: Vec<Vec<f64>>,
    /// Gershgorin estimate of the system's condition number exceeded
    /// [`ILL_CONDITIONED`].
    pub ill_conditioned: bool,
}

impl KernelHypothesis {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .zip(&self.alpha)
            .map(|(xi, a)| a * self.kernel.eval(xi, x))
            .sum()
    }

    /// `sqrt(α^T K α)`.
    pub fn rkhs_norm(&self) -> f64 {
        let k = gram_matrix(&self.points, &self.kernel).expect("points were validated at training time");
        k.quad_form(&self.alpha).max(0.0).sqrt()
    }
}

fn gershgorin_condition(a: &SymMatrix) -> f64 {
    let n = a.order();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| a.get(i, j).abs()).sum();
        lo = lo.min(a.get(i, i) - radius);
        hi = hi.max(a.get(i, i) + radius);
    }
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Minimizer of `Σ_i w_i (h(x_i) - y_i)^2 + λ ||h||_K^2` given the Gram
/// matrix of the sample points.
///
/// Solves `(W^{1/2} K W^{1/2} + λ I) β = W^{1/2} y` and returns
/// `α = W^{1/2} β`, which stays well posed when some weights are zero.
pub fn train_weighted_krr_gram(
    sample: &LabeledSample,
    weights: &SimplexVector,
    gram: &SymMatrix,
    kernel: &Kernel,
    lambda: f64,
) -> Result<KernelHypothesis> {
    check_lambda(lambda)?;
    check_weights(sample, weights)?;
    if gram.order() != sample.len() {
        return Err(Error::LengthMismatch {
            what: "gram matrix order",
            expected: sample.len(),
            found: gram.order(),
        });
    }
    let root: Vec<f64> = weights.as_slice().iter().map(|w| w.sqrt()).collect();
    let mut a = gram.diag_scaled(&root);
    a.add_scaled(lambda, &SymMatrix::identity(sample.len()));
    let rhs: Vec<f64> = root.iter().zip(sample.labels()).map(|(r, y)| r * y).collect();
    let beta = Cholesky::factor(&a)?.solve(&rhs);
    let alpha: Vec<f64> = beta.iter().zip(&root).map(|(b, r)| b * r).collect();
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("kernel ridge coefficients"));
    }
    Ok(KernelHypothesis {
        alpha,
        kernel: *kernel,
        points: sample.points().to_vec(),
        ill_conditioned: gershgorin_condition(&a) > ILL_CONDITIONED,
    })
}

pub fn train_weighted_krr(
    sample: &LabeledSample,
    weights: &SimplexVector,
    kernel: &Kernel,
    lambda: f64,
) -> Result<KernelHypothesis> {
    kernel.validate()?;
    let gram = gram_matrix(sample.points(), kernel)?;
    train_weighted_krr_gram(sample, weights, &gram, kernel, lambda)
}

/// Value of the weighted kernel ridge objective at `h`.
pub fn krr_objective(h: &KernelHypothesis, sample: &LabeledSample, weights: &SimplexVector, lambda: f64) -> f64 {
    let risk: f64 = sample
        .points()
        .iter()
        .zip(sample.labels())
        .zip(weights.as_slice())
        .map(|((x, y), w)| w * (h.predict(x) - y).powi(2))
        .sum();
    risk + lambda * h.rkhs_norm().powi(2)
}

/// `Σ_i α_i x_i` for the linear kernel.
pub fn primal_weights(h: &KernelHypothesis) -> Result<Vec<f64>> {
    if h.kernel != Kernel::Linear {
        return Err(Error::Unsupported("primal weights exist only for the linear kernel".into()));
    }
    let d = h.points.first().map_or(0, Vec::len);
    let mut w = vec![0.0; d];
    for (x, a) in h.points.iter().zip(&h.alpha) {
        for (wj, xj) in w.iter_mut().zip(x) {
            *wj += a * xj;
        }
    }
    Ok(w)
}
