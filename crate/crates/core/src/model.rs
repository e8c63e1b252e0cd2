//! Domain types shared by every module: weighted empirical distributions,
//! labeled samples, hypothesis-class and loss descriptors, simplex vectors.
//!
//! All types are immutable after construction.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Kernel;

/// Tolerance on `Σ weights = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Bit pattern used to identify equal points; `-0.0` and `0.0` collapse.
pub(crate) fn point_key(x: &[f64]) -> Vec<u64> {
    x.iter()
        .map(|v| if *v == 0.0 { 0u64 } else { v.to_bits() })
        .collect()
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptySupport)?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::param("dimension", "points must have at least one coordinate"));
    }
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point coordinates"));
        }
    }
    Ok(dim)
}

/// A finite support in R^N with a probability weight per point.
///
/// Points are pairwise distinct; duplicates are merged at construction by
/// summing their weights. Zero weights are allowed (a reweighting may put
/// no mass on some source point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEmpirical {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dim: usize,
}

impl WeightedEmpirical {
    /// Same as [`merge_duplicates`].
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        merge_duplicates(points, weights)
    }

    /// Uniform empirical distribution of a sample (duplicates accumulate mass).
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        merge_duplicates(points, vec![1.0; n])
    }

    pub fn from_scalars(xs: &[f64], weights: &[f64]) -> Result<Self> {
        merge_duplicates(xs.iter().map(|&x| vec![x]).collect(), weights.to_vec())
    }

    pub fn uniform_scalars(xs: &[f64]) -> Result<Self> {
        Self::uniform(xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same support, new weights (validated and renormalized).
    pub fn reweighted(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::LengthMismatch {
                what: "weights",
                expected: self.len(),
                found: weights.len(),
            });
        }
        let weights = normalize(weights)?;
        Ok(Self {
            points: self.points.clone(),
            weights,
            dim: self.dim,
        })
    }

    /// Mass at `x`, zero when `x` is off-support.
    pub fn mass_at(&self, x: &[f64]) -> f64 {
        let key = point_key(x);
        self.points
            .iter()
            .position(|p| point_key(p) == key)
            .map_or(0.0, |i| self.weights[i])
    }

    pub(crate) fn require_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

fn normalize(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("weights"));
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidWeights("negative weight"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidWeights("all weights are zero"));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Build a [`WeightedEmpirical`], merging repeated points and renormalizing.
///
/// First-occurrence order of the distinct points is preserved.
pub fn merge_duplicates(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<WeightedEmpirical> {
    if points.is_empty() {
        return Err(Error::EmptySupport);
    }
    if weights.len() != points.len() {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: points.len(),
            found: weights.len(),
        });
    }
    let dim = check_points(&points)?;
    let normalized = normalize(&weights)?;

    let mut index: HashMap<Vec<u64>, usize> = HashMap::with_capacity(points.len());
    let mut merged_points = Vec::with_capacity(points.len());
    let mut merged_weights: Vec<f64> = Vec::with_capacity(points.len());
    for (p, w) in points.into_iter().zip(normalized) {
        match index.get(&point_key(&p)) {
            Some(&i) => merged_weights[i] += w,
            None => {
                index.insert(point_key(&p), merged_points.len());
                merged_points.push(p);
                merged_weights.push(w);
            }
        }
    }
    Ok(WeightedEmpirical {
        points: merged_points,
        weights: merged_weights,
        dim,
    })
}

/// Labeled sample `((x_1, y_1), ..., (x_m, y_m))`. Classification uses labels in {0, 1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    points: Vec<Vec<f64>>,
    labels: Vec<f64>,
    dim: usize,
}

impl LabeledSample {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != points.len() {
            return Err(Error::LengthMismatch {
                what: "labels",
                expected: points.len(),
                found: labels.len(),
            });
        }
        let dim = check_points(&points)?;
        if labels.iter().any(|y| !y.is_finite()) {
            return Err(Error::NonFinite("labels"));
        }
        Ok(Self {
            points,
            labels,
            dim,
        })
    }

    pub fn from_scalars(xs: &[f64], labels: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| vec![x]).collect(), labels.to_vec())
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.labels.iter().all(|&y| y == 0.0 || y == 1.0)
    }
}

/// The hypothesis class `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HypothesisSpec {
    /// Prefixes `x <= z` and suffixes `x > z` on the real line.
    Threshold1D,
    /// `x -> w.x` with `|w| <= 1`.
    LinearBounded { dim: usize },
    /// Unit ball of the RKHS of `kernel`.
    KernelBounded { kernel: Kernel },
}

impl HypothesisSpec {
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            HypothesisSpec::Threshold1D if dim != 1 => Err(Error::DimensionMismatch {
                expected: 1,
                found: dim,
            }),
            HypothesisSpec::LinearBounded { dim: d } if *d != dim => {
                Err(Error::DimensionMismatch {
                    expected: *d,
                    found: dim,
                })
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    ZeroOne,
    Lq { q: f64 },
    Square,
    /// Only used for its admissibility constant.
    Hinge,
}

/// Loss function together with its bound `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    kind: LossKind,
    bound: f64,
}

impl LossSpec {
    pub fn zero_one() -> Self {
        Self {
            kind: LossKind::ZeroOne,
            bound: 1.0,
        }
    }

    pub fn lq(q: f64, bound: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::param("q", "must be a finite real >= 1"));
        }
        Self::with_kind(LossKind::Lq { q }, bound)
    }

    pub fn square(bound: f64) -> Result<Self> {
        Self::with_kind(LossKind::Square, bound)
    }

    pub fn hinge(bound: f64) -> Result<Self> {
        Self::with_kind(LossKind::Hinge, bound)
    }

    fn with_kind(kind: LossKind, bound: f64) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::param("M", "loss bound must be positive and finite"));
        }
        Ok(Self { kind, bound })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Exponent `q` of an `L_q` loss; 2 for the square loss, 1 for 0-1.
    pub fn exponent(&self) -> f64 {
        match self.kind {
            LossKind::Lq { q } => q,
            LossKind::Square => 2.0,
            LossKind::ZeroOne | LossKind::Hinge => 1.0,
        }
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        match self.kind {
            LossKind::ZeroOne => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
            LossKind::Lq { q } => (a - b).abs().powf(q),
            LossKind::Square => (a - b) * (a - b),
            LossKind::Hinge => (1.0 - a * b).max(0.0),
        }
    }

    /// Constant `σ` with `|L(h(x), y) - L(h'(x), y)| <= σ |h(x) - h'(x)|`.
    ///
    /// `q (2M)^(q-1)` for `L_q` (so `4M` for the square loss), 1 for the hinge
    /// loss. The 0-1 loss is not admissible.
    pub fn sigma_admissibility(&self) -> Option<f64> {
        match self.kind {
            LossKind::Lq { q } => Some(q * (2.0 * self.bound).powf(q - 1.0)),
            LossKind::Square => Some(4.0 * self.bound),
            LossKind::Hinge => Some(1.0),
            LossKind::ZeroOne => None,
        }
    }
}

/// `Σ_i w_i L(f_i, g_i)` for function values aligned with `dist`'s support.
pub fn empirical_loss(loss: &LossSpec, dist: &WeightedEmpirical, f: &[f64], g: &[f64]) -> Result<f64> {
    for (what, vals) in [("f", f), ("g", g)] {
        if vals.len() != dist.len() {
            return Err(Error::LengthMismatch {
                what,
                expected: dist.len(),
                found: vals.len(),
            });
        }
    }
    Ok(dist
        .weights()
        .iter()
        .zip(f.iter().zip(g))
        .map(|(w, (a, b))| w * loss.eval(*a, *b))
        .sum())
}

/// Reweighting `z` over a source support: nonnegative, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySupport);
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("simplex entries"));
        }
        if entries.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidWeights("negative simplex entry"));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights("simplex entries must sum to 1"));
        }
        Ok(Self(entries))
    }

    /// Clamp negatives to zero and divide by the total.
    pub fn from_unnormalized(entries: Vec<f64>) -> Result<Self> {
        let clamped: Vec<f64> = entries.into_iter().map(|v| v.max(0.0)).collect();
        Self::new(normalize(&clamped)?)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySupport);
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Union of two supports with the mass each distribution puts on every point.
///
/// Source points come first in source order, followed by target-only points in
/// target order. `source_index[k]` is the position of point `k` in the source
/// support, if any.
#[derive(Debug, Clone)]
pub struct JointSupport {
    pub points: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub source_index: Vec<Option<usize>>,
}

impl JointSupport {
    pub fn new(q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<Self> {
        q.require_dim(p)?;
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut points = Vec::with_capacity(q.len() + p.len());
        let mut qm = Vec::with_capacity(q.len() + p.len());
        let mut pm = Vec::with_capacity(q.len() + p.len());
        let mut source_index = Vec::with_capacity(q.len() + p.len());
        for (i, (x, w)) in q.points().iter().zip(q.weights()).enumerate() {
            index.insert(point_key(x), points.len());
            points.push(x.clone());
            qm.push(*w);
            pm.push(0.0);
            source_index.push(Some(i));
        }
        for (x, w) in p.points().iter().zip(p.weights()) {
            match index.get(&point_key(x)) {
                Some(&k) => pm[k] += *w,
                None => {
                    index.insert(point_key(x), points.len());
                    points.push(x.clone());
                    qm.push(0.0);
                    pm.push(*w);
                    source_index.push(None);
                }
            }
        }
        Ok(Self {
            points,
            q: qm,
            p: pm,
            source_index,
        })
    }

    /// Joint support of two 1D distributions, sorted by coordinate.
    pub fn sorted_1d(q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<Self> {
        for d in [q, p] {
            if d.dim() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    found: d.dim(),
                });
            }
        }
        let joint = Self::new(q, p)?;
        let mut order: Vec<usize> = (0..joint.len()).collect();
        order.sort_by(|&a, &b| joint.points[a][0].total_cmp(&joint.points[b][0]));
        Ok(Self {
            points: order.iter().map(|&k| joint.points[k].clone()).collect(),
            q: order.iter().map(|&k| joint.q[k]).collect(),
            p: order.iter().map(|&k| joint.p[k]).collect(),
            source_index: order.iter().map(|&k| joint.source_index[k]).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Q(k) - P(k)` per support point.
    pub fn signed_mass(&self) -> Vec<f64> {
        self.q.iter().zip(&self.p).map(|(a, b)| a - b).collect()
    }
}
