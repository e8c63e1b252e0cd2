//! Dense symmetric linear algebra: cyclic Jacobi eigendecomposition, spectral
//! abs-max with witness, PSD square root, Gram matrices and a Cholesky solver.
//!
//! Sizes here are desk-scale (orders up to a few hundred), so everything is
//! stored densely in row-major order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues below `-PSD_CLAMP * max(1, |λ|_max)` are rejected as non-PSD.
pub const PSD_CLAMP: f64 = 1e-9;

/// Real symmetric matrix, stored in full.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.data[i * m.n + i] = *v;
        }
        m
    }

    /// `x x^T`.
    pub fn outer(x: &[f64]) -> Self {
        let n = x.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = x[i] * x[j];
            }
        }
        Self { n, data }
    }

    /// Checks `|a_ij - a_ji| <= 1e-12 max(1, |a_ij|)` and stores `(A + A^T) / 2`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("matrix entries"));
            }
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
                data[i * n + j] = 0.5 * (a + b);
            }
        }
        Ok(Self { n, data })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius inner product `tr(A B)`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: f64, other: &SymMatrix) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// `self += c * x x^T`.
    pub fn add_outer(&mut self, c: f64, x: &[f64]) {
        let n = self.n;
        debug_assert_eq!(n, x.len());
        for i in 0..n {
            let ci = c * x[i];
            let row = &mut self.data[i * n..(i + 1) * n];
            for (r, xj) in row.iter_mut().zip(x) {
                *r += ci * xj;
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `self * D * self` for a diagonal `D`; symmetric by construction.
    pub fn sandwich_diag(&self, d: &[f64]) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|k| self.get(i, k) * d[k] * self.get(k, j)).sum();
                out.data[i * n + j] = v;
                out.data[j * n + i] = v;
            }
        }
        out
    }

    /// `D * self * D` for a diagonal `D`.
    pub fn diag_scaled(&self, d: &[f64]) -> Self {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] *= d[i] * d[j];
            }
        }
        out
    }

    /// Plain matrix product; the result is symmetrized, so only use it when
    /// the product is known to be symmetric (e.g. `R * R` for symmetric `R`).
    pub fn mul_symmetric(&self, other: &SymMatrix) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let a: f64 = (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum();
                let b: f64 = (0..n).map(|k| self.get(j, k) * other.get(k, i)).sum();
                let v = 0.5 * (a + b);
                out.data[i * n + j] = v;
                out.data[j * n + i] = v;
            }
        }
        out
    }
}

impl std::ops::Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl std::ops::Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        self.scaled(-1.0)
    }
}

/// Eigenvalues sorted in descending order with matching orthonormal eigenvectors.
///
/// Each eigenvector has its first component with magnitude above `1e-12`
/// made positive.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi eigendecomposition.
pub fn jacobi_eigen(a: &SymMatrix) -> Result<Eigen> {
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix entries"));
    }
    let n = a.order();
    let mut m = a.data.clone();
    let mut v = SymMatrix::identity(n).data;
    let scale = a.frobenius();
    let target = f64::EPSILON * scale;

    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                s += m[p * n + q] * m[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = n < 2 || scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        if off(&m) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = m[r * n + p];
                        let arq = m[r * n + q];
                        let np = c * arp - s * arq;
                        let nq = s * arp + c * arq;
                        m[r * n + p] = np;
                        m[p * n + r] = np;
                        m[r * n + q] = nq;
                        m[q * n + r] = nq;
                    }
                }
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    if !converged {
        let residual = off(&m);
        if residual > 1e-12 * scale.max(1.0) {
            return Err(Error::EigenNoConvergence {
                sweeps: MAX_SWEEPS,
                residual,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let values = order.iter().map(|&k| m[k * n + k]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..n).map(|r| v[r * n + k]).collect();
            if let Some(first) = col.iter().find(|c| c.abs() > 1e-12) {
                if *first < 0.0 {
                    col.iter_mut().for_each(|c| *c = -*c);
                }
            }
            col
        })
        .collect();
    Ok(Eigen { values, vectors })
}

/// Which of `λ_max(A)` / `λ_max(-A)` realizes the spectral abs-max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Positive,
    Negative,
}

#[derive(Debug, Clone)]
pub struct SpectralMax {
    pub value: f64,
    /// Unit vector with `|u^T A u| = value`.
    pub witness: Vec<f64>,
    pub branch: Branch,
}

/// `max(λ_max(A), λ_max(-A))` with its eigenvector. Ties go to the `+A` branch.
pub fn spectral_abs_max(a: &SymMatrix) -> Result<SpectralMax> {
    let n = a.order();
    if n == 0 {
        return Err(Error::EmptySupport);
    }
    let eig = jacobi_eigen(a)?;
    let top = eig.values[0];
    let bottom = eig.values[n - 1];
    if top >= -bottom {
        Ok(SpectralMax {
            value: top.max(0.0),
            witness: eig.vectors[0].clone(),
            branch: Branch::Positive,
        })
    } else {
        Ok(SpectralMax {
            value: -bottom,
            witness: eig.vectors[n - 1].clone(),
            branch: Branch::Negative,
        })
    }
}

/// Symmetric PSD square root via eigendecomposition; small negative
/// eigenvalues are clamped to zero.
pub fn psd_sqrt(k: &SymMatrix) -> Result<SymMatrix> {
    let eig = jacobi_eigen(k)?;
    let n = k.order();
    let magnitude = eig.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if let Some(&min) = eig.values.last() {
        if min < -PSD_CLAMP * magnitude {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
    }
    let mut r = SymMatrix::zeros(n);
    for (lambda, vec) in eig.values.iter().zip(&eig.vectors) {
        if *lambda > 0.0 {
            r.add_outer(lambda.sqrt(), vec);
        }
    }
    Ok(r)
}

/// Positive-definite symmetric kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    /// `exp(-γ |x - y|^2)`
    Gaussian { gamma: f64 },
    /// `(x.y + c)^degree`
    Polynomial { c: f64, degree: u32 },
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Gaussian { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::param("gamma", "must be positive and finite"))
            }
            Kernel::Polynomial { c, .. } if !(c >= 0.0 && c.is_finite()) => {
                Err(Error::param("c", "must be nonnegative and finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(x, y),
            Kernel::Gaussian { gamma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            Kernel::Polynomial { c, degree } => (dot(x, y) + c).powi(degree as i32),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Linear => write!(f, "linear"),
            Kernel::Gaussian { gamma } => write!(f, "gaussian:{gamma}"),
            Kernel::Polynomial { c, degree } => write!(f, "polynomial:{c}:{degree}"),
        }
    }
}

/// Parses `linear`, `gaussian:<γ>` or `polynomial:<c>:<degree>`.
impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::param("kernel", format!("cannot parse `{s}`"));
        let kernel = match parts.as_slice() {
            ["linear"] => Kernel::Linear,
            ["gaussian", g] => Kernel::Gaussian {
                gamma: g.parse().map_err(|_| bad())?,
            },
            ["polynomial", c, d] => Kernel::Polynomial {
                c: c.parse().map_err(|_| bad())?,
                degree: d.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        kernel.validate()?;
        Ok(kernel)
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `K_ij = k(x_i, x_j)`.
pub fn gram_matrix(points: &[Vec<f64>], kernel: &Kernel) -> Result<SymMatrix> {
    if points.is_empty() {
        return Err(Error::EmptySupport);
    }
    kernel.validate()?;
    let n = points.len();
    let mut k = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&points[i], &points[j]);
            k.data[i * n + j] = v;
            k.data[j * n + i] = v;
        }
    }
    Ok(k)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(a: &SymMatrix) -> Result<Self> {
        let n = a.order();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) {
                return Err(Error::Singular);
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

/// `M(z) = M_0 - Σ z_i M_i`.
#[derive(Debug, Clone)]
pub struct AffineMatrixFamily {
    base: SymMatrix,
    terms: Vec<SymMatrix>,
}

impl AffineMatrixFamily {
    pub fn new(base: SymMatrix, terms: Vec<SymMatrix>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.order() != base.order()) {
            return Err(Error::DimensionMismatch {
                expected: base.order(),
                found: t.order(),
            });
        }
        Ok(Self { base, terms })
    }

    pub fn base(&self) -> &SymMatrix {
        &self.base
    }

    pub fn terms(&self) -> &[SymMatrix] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    pub fn evaluate(&self, z: &[f64]) -> SymMatrix {
        let mut m = self.base.clone();
        for (zi, mi) in z.iter().zip(&self.terms) {
            if *zi != 0.0 {
                m.add_scaled(-zi, mi);
            }
        }
        m
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            base: self.base.scaled(c),
            terms: self.terms.iter().map(|t| t.scaled(c)).collect(),
        }
    }
}
