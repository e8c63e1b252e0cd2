//! Entropic mirror descent for `min_{z in simplex} ||M_0 - Σ z_i M_i||_2`.

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, psd_sqrt, spectral_abs_max, AffineMatrixFamily, Branch, SymMatrix};
use crate::model::{JointSupport, SimplexVector, WeightedEmpirical};

use super::{FirstOrderMethod, ReweightResult, SolverConfig};

/// Iterations over which the best value must settle for convergence.
const CONVERGENCE_WINDOW: usize = 100;
/// The averaged iterate is evaluated every this many steps.
const AVERAGE_EVERY: usize = 10;

fn objective(family: &AffineMatrixFamily, z: &[f64]) -> Result<f64> {
    Ok(spectral_abs_max(&family.evaluate(z))?.value)
}

fn initial_point(n: usize, cfg: &SolverConfig) -> Result<Vec<f64>> {
    match &cfg.warm_start {
        None => Ok(SimplexVector::uniform(n)?.into_vec()),
        Some(z) if z.len() != n => Err(Error::LengthMismatch {
            what: "warm start",
            expected: n,
            found: z.len(),
        }),
        Some(z) => Ok(SimplexVector::from_unnormalized(z.clone())?.into_vec()),
    }
}

/// Minimize the spectral abs-max of an affine family over the simplex.
///
/// The family is rescaled by `1/||M_0||_F` so step sizes are scale free.
/// `achieved_disc` is four times the objective at the returned weights and
/// `lower_bound` is four times a duality certificate: for any `W` with
/// nuclear norm at most one, every `z` has
/// `F(z) >= <W, M_0> - max_i <W, M_i>`.
pub fn minimize_family(family: &AffineMatrixFamily, cfg: &SolverConfig) -> Result<ReweightResult> {
    cfg.validate()?;
    let m0 = family.len();
    if m0 == 0 {
        return Err(Error::EmptySupport);
    }
    if m0 == 1 {
        let value = 4.0 * objective(family, &[1.0])?;
        return Ok(ReweightResult {
            weights: SimplexVector::uniform(1)?,
            achieved_disc: value,
            lower_bound: value,
            trace: vec![value],
            converged: true,
            flags: Vec::new(),
        });
    }
    let base_norm = family.base().frobenius();
    let scale = if base_norm > 0.0 { 1.0 / base_norm } else { 1.0 };
    let fam = family.scaled(scale);
    let z0 = initial_point(m0, cfg)?;
    let mut run = match cfg.method {
        FirstOrderMethod::MirrorProx => mirror_prox(&fam, z0, cfg)?,
        FirstOrderMethod::Subgradient => subgradient(&fam, z0, cfg)?,
    };
    let report = 4.0 / scale;
    for v in run.trace.iter_mut() {
        *v *= report;
    }

    let weights = SimplexVector::from_unnormalized(run.best_z)?;
    let achieved_disc = 4.0 * objective(family, weights.as_slice())?;
    let lower_bound = (run.certificate * report).min(achieved_disc);
    let trace = run.trace;
    let window = CONVERGENCE_WINDOW.min(trace.len().saturating_sub(1));
    let converged = achieved_disc == 0.0
        || (window == CONVERGENCE_WINDOW
            && (trace[trace.len() - 1 - window] - trace[trace.len() - 1]) / report < cfg.tol);
    if !converged {
        run.flags.push("not converged".to_string());
    }
    Ok(ReweightResult {
        weights,
        achieved_disc,
        lower_bound,
        trace,
        converged,
        flags: run.flags,
    })
}

/// Outcome of a first-order run on a normalized family.
struct Run {
    best_z: Vec<f64>,
    /// Best objective after each iteration.
    trace: Vec<f64>,
    certificate: f64,
    flags: Vec<String>,
}

/// Keeps the best point seen so far.
struct Incumbent {
    z: Vec<f64>,
    value: f64,
}

impl Incumbent {
    fn offer(&mut self, z: &[f64], value: f64) {
        if value < self.value {
            self.value = value;
            self.z.clear();
            self.z.extend_from_slice(z);
        }
    }
}

/// `max(A - max_i C_i, min_i C_i - A, 0)` with `A = <W, M_0>`, `C_i = <W, M_i>`.
fn certificate(a: f64, c: &[f64]) -> f64 {
    let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
    (a - hi).max(lo - a).max(0.0)
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let shift = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|v| (v - shift).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

/// Density matrix `blockdiag(Y_+, Y_-)` proportional to
/// `exp(blockdiag(S_+, S_-))`, returned as its two blocks.
fn density(pos: &SymMatrix, neg: &SymMatrix) -> Result<(SymMatrix, SymMatrix)> {
    let ep = jacobi_eigen(pos)?;
    let en = jacobi_eigen(neg)?;
    let shift = ep.values[0].max(en.values[0]);
    let mut blocks = [SymMatrix::zeros(pos.order()), SymMatrix::zeros(pos.order())];
    let mut total = 0.0;
    for (eig, block) in [&ep, &en].into_iter().zip(blocks.iter_mut()) {
        for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
            let e = (lambda - shift).exp();
            if e > 0.0 {
                block.add_outer(e, v);
                total += e;
            }
        }
    }
    let [yp, yn] = blocks;
    Ok((yp.scaled(1.0 / total), yn.scaled(1.0 / total)))
}

fn nuclear_norm(a: &SymMatrix) -> Result<f64> {
    Ok(jacobi_eigen(a)?.values.iter().map(|v| v.abs()).sum())
}

/// One point of the saddle iteration with the field evaluated at it.
struct SaddlePoint {
    z: Vec<f64>,
    yp: SymMatrix,
    yn: SymMatrix,
    /// `M(z)`
    mz: SymMatrix,
    /// `<Y_+ - Y_-, M_i>`
    c: Vec<f64>,
}

impl SaddlePoint {
    fn new(fam: &AffineMatrixFamily, logz: &[f64], pos: &SymMatrix, neg: &SymMatrix) -> Result<Self> {
        let z = softmax(logz);
        let (yp, yn) = density(pos, neg)?;
        let w = &yp - &yn;
        let c = fam.terms().iter().map(|m| w.inner(m)).collect();
        let mz = fam.evaluate(&z);
        Ok(Self { z, yp, yn, mz, c })
    }

    /// Ratio of the field change to the point change, in the dual pair
    /// `(l_inf, operator) / (l_1, nuclear)`.
    fn local_lipschitz(&self, other: &SaddlePoint) -> Result<f64> {
        let dc = self.c.iter().zip(&other.c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let dm = spectral_abs_max(&(&self.mz - &other.mz))?.value;
        let dz: f64 = self.z.iter().zip(&other.z).map(|(a, b)| (a - b).abs()).sum();
        let dy = nuclear_norm(&(&self.yp - &other.yp))? + nuclear_norm(&(&self.yn - &other.yn))?;
        let den = dz + dy;
        Ok(if den > 0.0 { dc.max(dm) / den } else { 0.0 })
    }
}

/// Step acceptance: `γ L_local <= STEP_SAFETY`.
const STEP_SAFETY: f64 = 0.7;
const STEP_GROWTH: f64 = 1.2;
const MAX_BACKTRACKS: usize = 60;
/// Length of the first epoch; each later epoch is twice as long.
const RESTART_EPOCH: usize = 100;
/// Weight of the uniform point mixed into the incumbent at a restart, so that
/// coordinates driven near zero can recover.
const RESTART_MIX: f64 = 1e-3;

/// Mirror-prox (extragradient) on the saddle problem
/// `min_z max_{||W||_* <= 1} <W, M(z)>`, entropic on the simplex and
/// matrix-entropic on `W = Y_+ - Y_-`. The first step is `η_0 / max_i ||M_i||`;
/// afterwards the step backtracks against a local Lipschitz estimate and
/// grows by a constant factor after each accepted iteration. The objective is
/// tracked at every extrapolated point and at the step-weighted average.
/// Epochs of doubling length restart the primal iterate at the best point so
/// far; the dual state carries over.
fn mirror_prox(fam: &AffineMatrixFamily, z0: Vec<f64>, cfg: &SolverConfig) -> Result<Run> {
    let m0 = fam.len();
    let n = fam.order();
    let mut lipschitz = 0.0f64;
    for t in fam.terms() {
        lipschitz = lipschitz.max(spectral_abs_max(t)?.value);
    }
    let mut gamma = cfg.eta0 / lipschitz.max(f64::MIN_POSITIVE);

    let mut logz: Vec<f64> = z0.iter().map(|v| v.ln()).collect();
    let mut pos = SymMatrix::zeros(n);
    let mut neg = SymMatrix::zeros(n);
    let mut best = Incumbent {
        z: z0.clone(),
        value: objective(fam, &z0)?,
    };
    let mut trace = Vec::with_capacity(cfg.max_iters);
    let mut z_sum = vec![0.0; m0];
    let mut gamma_sum = 0.0;
    let mut dual_base = 0.0;
    let mut dual_terms = vec![0.0; m0];
    let mut flags = Vec::new();
    let mut best_certificate = 0.0f64;

    let mut epoch_len = RESTART_EPOCH;
    let mut epoch_start = 0;
    for t in 1..=cfg.max_iters {
        if t - epoch_start > epoch_len {
            // restart the primal side and the averages at the incumbent
            epoch_start = t - 1;
            epoch_len *= 2;
            logz = best
                .z
                .iter()
                .map(|v| ((1.0 - RESTART_MIX) * v + RESTART_MIX / m0 as f64).ln())
                .collect();
            z_sum.fill(0.0);
            gamma_sum = 0.0;
            dual_base = 0.0;
            dual_terms.fill(0.0);
        }
        let here = SaddlePoint::new(fam, &logz, &pos, &neg)?;
        let mut tries = 0;
        let (step, ahead) = loop {
            let logz_u: Vec<f64> = logz.iter().zip(&here.c).map(|(l, ci)| l + gamma * ci).collect();
            let mut pos_u = pos.clone();
            pos_u.add_scaled(gamma, &here.mz);
            let mut neg_u = neg.clone();
            neg_u.add_scaled(-gamma, &here.mz);
            let ahead = SaddlePoint::new(fam, &logz_u, &pos_u, &neg_u)?;
            tries += 1;
            if gamma * ahead.local_lipschitz(&here)? <= STEP_SAFETY || tries == MAX_BACKTRACKS {
                break (gamma, ahead);
            }
            gamma *= 0.5;
        };
        if tries == MAX_BACKTRACKS {
            flags.push(format!("step size search exhausted at iteration {t}"));
        }

        // update from the extrapolated field
        for (l, ci) in logz.iter_mut().zip(&ahead.c) {
            *l += step * ci;
        }
        pos.add_scaled(step, &ahead.mz);
        neg.add_scaled(-step, &ahead.mz);

        best.offer(&ahead.z, spectral_abs_max(&ahead.mz)?.value);
        gamma_sum += step;
        let a = (&ahead.yp - &ahead.yn).inner(fam.base());
        best_certificate = best_certificate.max(certificate(a, &ahead.c));
        dual_base += step * a;
        for ((s, d), (zi, ci)) in z_sum.iter_mut().zip(dual_terms.iter_mut()).zip(ahead.z.iter().zip(&ahead.c)) {
            *s += step * zi;
            *d += step * ci;
        }
        if t % AVERAGE_EVERY == 0 || t == cfg.max_iters {
            let avg: Vec<f64> = z_sum.iter().map(|s| s / gamma_sum).collect();
            let v = objective(fam, &avg)?;
            best.offer(&avg, v);
        }
        trace.push(best.value);
        gamma = step * STEP_GROWTH;
    }
    let c_avg: Vec<f64> = dual_terms.iter().map(|d| d / gamma_sum).collect();
    Ok(Run {
        best_z: best.z,
        trace,
        certificate: certificate(dual_base / gamma_sum, &c_avg).max(best_certificate),
        flags,
    })
}

/// Entropic mirror descent with eigenvector subgradients: with `u` the
/// eigenvector of the active branch (`s = ±1` for `±M`), `g_i = -s u^T M_i u`
/// and `z <- z exp(-η_t g) / norm`, `η_t = η_0/sqrt(t)`.
fn subgradient(fam: &AffineMatrixFamily, z0: Vec<f64>, cfg: &SolverConfig) -> Result<Run> {
    let m0 = fam.len();
    let mut z = z0;
    let mut best = Incumbent {
        z: z.clone(),
        value: f64::INFINITY,
    };
    let mut trace = Vec::with_capacity(cfg.max_iters);
    let mut average = vec![0.0; m0];
    let mut eta_sum = 0.0;
    let mut dual_base = 0.0;
    let mut dual_terms = vec![0.0; m0];
    let mut flags = Vec::new();

    for t in 1..=cfg.max_iters {
        let s = spectral_abs_max(&fam.evaluate(&z))?;
        best.offer(&z, s.value);
        let sign = match s.branch {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        };
        let eta = cfg.eta0 / (t as f64).sqrt();
        let curv: Vec<f64> = fam.terms().iter().map(|m| m.quad_form(&s.witness)).collect();

        eta_sum += eta;
        dual_base += eta * sign * fam.base().quad_form(&s.witness);
        for ((a, d), (zi, c)) in average.iter_mut().zip(dual_terms.iter_mut()).zip(z.iter().zip(&curv)) {
            *a += eta * zi;
            *d += eta * sign * c;
        }

        // -η g_i = η s c_i, shifted by its maximum before exponentiating
        let exps: Vec<f64> = curv.iter().map(|c| eta * sign * c).collect();
        let shift = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (zi, e) in z.iter_mut().zip(&exps) {
            *zi *= (e - shift).exp();
            total += *zi;
        }
        if !(total > 0.0 && total.is_finite()) {
            flags.push(format!("iterate collapsed at step {t}"));
            trace.push(best.value);
            break;
        }
        for zi in z.iter_mut() {
            *zi /= total;
        }

        if t % AVERAGE_EVERY == 0 || t == cfg.max_iters {
            let avg: Vec<f64> = average.iter().map(|a| a / eta_sum).collect();
            let v = objective(fam, &avg)?;
            best.offer(&avg, v);
        }
        trace.push(best.value);
    }
    let last = objective(fam, &z)?;
    if last < best.value {
        best.offer(&z, last);
        if let Some(tail) = trace.last_mut() {
            *tail = last;
        }
    }
    let c_avg: Vec<f64> = dual_terms.iter().map(|d| d / eta_sum).collect();
    Ok(Run {
        best_z: best.z,
        trace,
        certificate: certificate(dual_base / eta_sum, &c_avg),
        flags,
    })
}

/// `M(z) = Σ_x P(x) x x^T - Σ_i z_i s_i s_i^T` over the source support `s_i`.
pub fn linear_family(q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<AffineMatrixFamily> {
    q.require_dim(p)?;
    let mut base = SymMatrix::zeros(p.dim());
    for (x, w) in p.points().iter().zip(p.weights()) {
        base.add_outer(*w, x);
    }
    AffineMatrixFamily::new(base, q.points().iter().map(|s| SymMatrix::outer(s)).collect())
}

/// `M'(z) = K^{1/2} (diag(P) - Σ z_i e_i e_i^T) K^{1/2}` over the joint
/// support, source points first.
pub fn kernel_family(q: &WeightedEmpirical, p: &WeightedEmpirical, gram: &SymMatrix) -> Result<AffineMatrixFamily> {
    let joint = JointSupport::new(q, p)?;
    if gram.order() != joint.len() {
        return Err(Error::DimensionMismatch {
            expected: joint.len(),
            found: gram.order(),
        });
    }
    let root = psd_sqrt(gram)?;
    let base = root.sandwich_diag(&joint.p);
    let columns = root.rows();
    AffineMatrixFamily::new(base, columns[..q.len()].iter().map(|c| SymMatrix::outer(c)).collect())
}

pub fn minimize_l2_linear(q: &WeightedEmpirical, p: &WeightedEmpirical, cfg: &SolverConfig) -> Result<ReweightResult> {
    minimize_family(&linear_family(q, p)?, cfg)
}

/// `gram` is over the joint support of `q` and `p` with source points first.
pub fn minimize_l2_kernel(
    q: &WeightedEmpirical,
    p: &WeightedEmpirical,
    gram: &SymMatrix,
    cfg: &SolverConfig,
) -> Result<ReweightResult> {
    minimize_family(&kernel_family(q, p, gram)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::{disc_l2_kernel, disc_l2_linear};
    use crate::linalg::{gram_matrix, Kernel};
    use crate::minimize::grid_oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(rng: &mut ChaCha8Rng, m0: usize, n0: usize, dim: usize) -> (WeightedEmpirical, WeightedEmpirical) {
        let mut pts = |k: usize| -> Vec<Vec<f64>> {
            (0..k).map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()
        };
        let q = WeightedEmpirical::uniform(pts(m0)).unwrap();
        let p = WeightedEmpirical::uniform(pts(n0)).unwrap();
        (q, p)
    }

    #[test]
    fn coincident_supports_reach_zero() {
        let q = WeightedEmpirical::uniform(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let p = q.reweighted(&[0.5, 0.25, 0.25]).unwrap();
        let r = minimize_l2_linear(&q, &p, &SolverConfig::default()).unwrap();
        assert!(r.achieved_disc < 1e-3, "{}", r.achieved_disc);
        assert!(r.lower_bound <= r.achieved_disc);
    }

    #[test]
    fn single_source_point_is_not_optimized() {
        let q = WeightedEmpirical::uniform(vec![vec![1.0, 0.0]]).unwrap();
        let p = WeightedEmpirical::uniform(vec![vec![0.0, 1.0]]).unwrap();
        let r = minimize_l2_linear(&q, &p, &SolverConfig::default()).unwrap();
        assert_eq!(r.weights.as_slice(), &[1.0]);
        assert_eq!(r.achieved_disc, disc_l2_linear(&q, &p).unwrap().value);
    }

    #[test]
    fn best_trace_is_monotone_and_beats_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let (q, p) = random_instance(&mut rng, 5, 7, 3);
            let r = minimize_l2_linear(&q, &p, &SolverConfig::default()).unwrap();
            assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
            assert!(r.achieved_disc <= disc_l2_linear(&q, &p).unwrap().value + 1e-12);
            assert!(r.lower_bound <= r.achieved_disc + 1e-9);
        }
    }

    #[test]
    fn warm_start_never_increases_discrepancy() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (q, p) = random_instance(&mut rng, 4, 6, 2);
        let q = q.reweighted(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let cfg = SolverConfig {
            warm_start: Some(q.weights().to_vec()),
            max_iters: 50,
            ..SolverConfig::default()
        };
        let r = minimize_l2_linear(&q, &p, &cfg).unwrap();
        assert!(r.achieved_disc <= disc_l2_linear(&q, &p).unwrap().value + 1e-12);
    }

    #[test]
    fn gaussian_kernel_two_points_matches_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let kernel = Kernel::Gaussian { gamma: 0.5 };
        for _ in 0..3 {
            let (q, p) = random_instance(&mut rng, 2, 4, 2);
            let joint = JointSupport::new(&q, &p).unwrap();
            let gram = gram_matrix(&joint.points, &kernel).unwrap();
            let r = minimize_l2_kernel(&q, &p, &gram, &SolverConfig::default()).unwrap();
            let family = kernel_family(&q, &p, &gram).unwrap();
            let (_, grid) = grid_oracle(|z| 4.0 * objective(&family, z).unwrap(), 2, 0.005).unwrap();
            assert!(r.achieved_disc <= grid + 1e-3 * family.base().frobenius(), "{} vs {grid}", r.achieved_disc);
            // uniform start value equals the kernel discrepancy of the uniform reweighting
            let start = 4.0 * objective(&family, &[0.5, 0.5]).unwrap();
            assert!((start - disc_l2_kernel(&q, &p, &kernel).unwrap().value).abs() < 1e-10);
        }
    }

    #[test]
    fn convex_along_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let (q, p) = random_instance(&mut rng, 4, 5, 3);
        let family = linear_family(&q, &p).unwrap();
        for _ in 0..20 {
            let a = SimplexVector::from_unnormalized((0..4).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap();
            let b = SimplexVector::from_unnormalized((0..4).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap();
            let f = |t: f64| {
                let z: Vec<f64> = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (1.0 - t) * x + t * y).collect();
                objective(&family, &z).unwrap()
            };
            for k in 1..10 {
                let t = k as f64 / 10.0;
                assert!(f(t) <= (1.0 - t) * f(0.0) + t * f(1.0) + 1e-9);
            }
        }
    }

    #[test]
    fn gram_order_checked() {
        let q = WeightedEmpirical::uniform(vec![vec![1.0]]).unwrap();
        let p = WeightedEmpirical::uniform(vec![vec![2.0]]).unwrap();
        assert!(minimize_l2_kernel(&q, &p, &SymMatrix::identity(3), &SolverConfig::default()).is_err());
    }
}
