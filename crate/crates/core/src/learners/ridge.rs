use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Cholesky, SymMatrix};
use crate::model::{LabeledSample, SimplexVector};

use super::{check_lambda, check_weights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearHypothesis {
    pub w: Vec<f64>,
}

impl LinearHypothesis {
    pub fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.w, x)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.w)
    }
}

/// Minimizer of `Σ_i w_i (v.x_i - y_i)^2 + λ |v|^2`, from
/// `(X^T W X + λ I) v = X^T W y`.
pub fn train_weighted_ridge(sample: &LabeledSample, weights: &SimplexVector, lambda: f64) -> Result<LinearHypothesis> {
    check_lambda(lambda)?;
    check_weights(sample, weights)?;
    let d = sample.dim();
    let mut a = SymMatrix::identity(d).scaled(lambda);
    let mut b = vec![0.0; d];
    for ((x, y), w) in sample.points().iter().zip(sample.labels()).zip(weights.as_slice()) {
        a.add_outer(*w, x);
        for (bj, xj) in b.iter_mut().zip(x) {
            *bj += w * y * xj;
        }
    }
    let w = Cholesky::factor(&a)?.solve(&b);
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ridge solution"));
    }
    Ok(LinearHypothesis { w })
}

/// Value of the weighted ridge objective at `h`.
pub fn ridge_objective(h: &LinearHypothesis, sample: &LabeledSample, weights: &SimplexVector, lambda: f64) -> f64 {
    let risk: f64 = sample
        .points()
        .iter()
        .zip(sample.labels())
        .zip(weights.as_slice())
        .map(|((x, y), w)| w * (h.predict(x) - y).powi(2))
        .sum();
    risk + lambda * dot(&h.w, &h.w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_problem(seed: u64, n: usize, d: usize) -> (LabeledSample, SimplexVector) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let labels = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = SimplexVector::from_unnormalized((0..n).map(|_| rng.random_range(0.1..1.0)).collect()).unwrap();
        (LabeledSample::new(points, labels).unwrap(), w)
    }

    #[test]
    fn gradient_vanishes() {
        for seed in 0..20 {
            let (s, w) = random_problem(seed, 15, 3);
            let lambda = 0.1;
            let h = train_weighted_ridge(&s, &w, lambda).unwrap();
            let mut grad: Vec<f64> = h.w.iter().map(|v| 2.0 * lambda * v).collect();
            for ((x, y), wi) in s.points().iter().zip(s.labels()).zip(w.as_slice()) {
                let r = h.predict(x) - y;
                for (g, xj) in grad.iter_mut().zip(x) {
                    *g += 2.0 * wi * r * xj;
                }
            }
            assert!(norm(&grad) <= 1e-8, "{}", norm(&grad));
        }
    }

    #[test]
    fn perturbations_do_not_decrease_the_objective() {
        let (s, w) = random_problem(3, 10, 2);
        let h = train_weighted_ridge(&s, &w, 0.5).unwrap();
        let f0 = ridge_objective(&h, &s, &w, 0.5);
        for dir in [[1.0, 0.0], [0.0, 1.0], [0.6, -0.8]] {
            for eps in [1e-3, -1e-3] {
                let moved = LinearHypothesis {
                    w: h.w.iter().zip(dir).map(|(v, d)| v + eps * d).collect(),
                };
                assert!(ridge_objective(&moved, &s, &w, 0.5) >= f0);
            }
        }
    }

    #[test]
    fn scalar_closed_form() {
        let s = LabeledSample::from_scalars(&[1.0, 2.0], &[1.0, 3.0]).unwrap();
        let w = SimplexVector::new(vec![0.25, 0.75]).unwrap();
        let h = train_weighted_ridge(&s, &w, 1.0).unwrap();
        // (0.25 + 3 + 1) v = 0.25 + 4.5
        assert!((h.w[0] - 4.75 / 4.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_lambda() {
        let (s, w) = random_problem(0, 4, 2);
        assert!(train_weighted_ridge(&s, &w, 0.0).is_err());
        assert!(train_weighted_ridge(&s, &w, f64::NAN).is_err());
    }
}
