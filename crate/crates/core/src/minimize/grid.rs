//! Exhaustive search over a regular grid of the probability simplex.

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const GRID_MAX_DIM: usize = 4;

/// All compositions of `k` into `parts` nonnegative parts, lexicographic.
fn compositions(k: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![k]];
    }
    let mut out = Vec::new();
    for first in 0..=k {
        for mut rest in compositions(k - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Minimum of `objective` over `{z in simplex : z_i multiple of step}`.
///
/// Points are visited in lexicographic order of `(z_1, ..., z_m)` and only a
/// strict improvement replaces the incumbent.
pub fn grid_oracle<F>(objective: F, m0: usize, step: f64) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if m0 == 0 {
        return Err(Error::EmptySupport);
    }
    if m0 > GRID_MAX_DIM {
        return Err(Error::CombinatorialBlowup {
            size: m0,
            limit: GRID_MAX_DIM,
        });
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::param("step", "must lie in (0, 1]"));
    }
    let k = (1.0 / step).round() as usize;
    if ((k as f64) * step - 1.0).abs() > 1e-9 {
        return Err(Error::param("step", "1/step must be an integer"));
    }
    let points: Vec<Vec<f64>> = compositions(k, m0)
        .into_iter()
        .map(|c| c.into_iter().map(|v| v as f64 / k as f64).collect())
        .collect();
    let values: Vec<f64> = points.par_iter().map(|z| objective(z)).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    Ok((points[best].clone(), values[best]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_objective_returns_first_point() {
        let (z, v) = grid_oracle(|_| 3.5, 3, 0.25).unwrap();
        assert_eq!(v, 3.5);
        assert_eq!(z, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn linear_objective() {
        let (z, v) = grid_oracle(|z| z[0], 2, 0.005).unwrap();
        assert_eq!(z, vec![0.0, 1.0]);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn grid_size_and_limits() {
        assert_eq!(compositions(200, 3).len(), 201 * 202 / 2);
        assert!(grid_oracle(|_| 0.0, 5, 0.5).is_err());
        assert!(grid_oracle(|_| 0.0, 2, 0.3).is_err());
        let (z, _) = grid_oracle(|z| (z[0] - 0.3).powi(2) + (z[1] - 0.7).powi(2), 2, 0.1).unwrap();
        assert!((z[0] - 0.3).abs() < 1e-12);
    }
}
