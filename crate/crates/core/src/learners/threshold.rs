use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LabeledSample, SimplexVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `x <= cutoff` is labeled 1.
    PredictOneLeft,
    /// `x > cutoff` is labeled 1.
    PredictOneRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdHypothesis {
    pub cutoff: f64,
    pub orientation: Orientation,
}

impl ThresholdHypothesis {
    pub fn predict(&self, x: f64) -> f64 {
        let left = x <= self.cutoff;
        match (self.orientation, left) {
            (Orientation::PredictOneLeft, true) | (Orientation::PredictOneRight, false) => 1.0,
            _ => 0.0,
        }
    }

    /// Fraction of `sample` labeled correctly.
    pub fn accuracy(&self, sample: &LabeledSample) -> f64 {
        let hits = sample
            .points()
            .iter()
            .zip(sample.labels())
            .filter(|(x, y)| self.predict(x[0]) == **y)
            .count();
        hits as f64 / sample.len() as f64
    }
}

fn check(sample: &LabeledSample, weights: &SimplexVector) -> Result<()> {
    if sample.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: sample.dim(),
        });
    }
    if !sample.is_binary() {
        return Err(Error::param("labels", "threshold learning needs labels in {0, 1}"));
    }
    if weights.len() != sample.len() {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: sample.len(),
            found: weights.len(),
        });
    }
    Ok(())
}

/// `Σ_i w_i 1[h(x_i) != y_i]`.
pub fn weighted_error(h: &ThresholdHypothesis, sample: &LabeledSample, weights: &SimplexVector) -> Result<f64> {
    check(sample, weights)?;
    Ok(sample
        .points()
        .iter()
        .zip(sample.labels())
        .zip(weights.as_slice())
        .filter(|((x, y), _)| h.predict(x[0]) != **y)
        .map(|(_, w)| w)
        .sum())
}

/// Exact weighted 0-1 ERM over prefixes and suffixes.
///
/// Candidate cutoffs are `min x - 1`, the midpoints between consecutive
/// distinct values and `max x + 1`, scanned in increasing order with
/// `PredictOneRight` tried before `PredictOneLeft`; only a strict improvement
/// replaces the incumbent.
pub fn train_weighted_threshold(sample: &LabeledSample, weights: &SimplexVector) -> Result<ThresholdHypothesis> {
    if sample.is_empty() {
        return Err(Error::EmptySupport);
    }
    check(sample, weights)?;
    let mut order: Vec<usize> = (0..sample.len()).collect();
    order.sort_by(|&a, &b| sample.points()[a][0].total_cmp(&sample.points()[b][0]));
    let x = |k: usize| sample.points()[order[k]][0];

    // mass of each label on the left of the cutoff
    let (mut left_one, mut left_zero) = (0.0, 0.0);
    let (total_one, total_zero) = order.iter().fold((0.0, 0.0), |(o, z), &i| {
        if sample.labels()[i] == 1.0 {
            (o + weights.as_slice()[i], z)
        } else {
            (o, z + weights.as_slice()[i])
        }
    });

    let n = order.len();
    let mut best: Option<(f64, ThresholdHypothesis)> = None;
    let mut consider = |cutoff: f64, left_one: f64, left_zero: f64| {
        let right_err = left_one + (total_zero - left_zero);
        let left_err = left_zero + (total_one - left_one);
        for (err, orientation) in [
            (right_err, Orientation::PredictOneRight),
            (left_err, Orientation::PredictOneLeft),
        ] {
            if best.as_ref().is_none_or(|(e, _)| err < *e) {
                best = Some((err, ThresholdHypothesis { cutoff, orientation }));
            }
        }
    };
    consider(x(0) - 1.0, 0.0, 0.0);
    let mut k = 0;
    while k < n {
        let v = x(k);
        while k < n && x(k) == v {
            let i = order[k];
            if sample.labels()[i] == 1.0 {
                left_one += weights.as_slice()[i];
            } else {
                left_zero += weights.as_slice()[i];
            }
            k += 1;
        }
        let cutoff = if k < n { 0.5 * (v + x(k)) } else { v + 1.0 };
        consider(cutoff, left_one, left_zero);
    }
    Ok(best.map(|(_, h)| h).expect("at least one candidate"))
}
