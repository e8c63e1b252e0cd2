//! Dense two-phase primal simplex with Bland's rule, plus the 0-1 loss
//! discrepancy-minimization LP built on it.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{point_key, SimplexVector, WeightedEmpirical};
use crate::discrepancy::disc_01_threshold1d;

use super::{one_d, ReweightResult};

const PIVOT_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows x (cols + 1)`, last column is the right-hand side.
    a: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let p = self.a[r * w + c];
        for k in 0..w {
            self.a[r * w + k] /= p;
        }
        let pivot_row: Vec<f64> = self.a[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.a[i * w + c];
            if f != 0.0 {
                for k in 0..w {
                    self.a[i * w + k] -= f * pivot_row[k];
                }
                self.a[i * w + c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Minimize `cost . x` over columns `allowed` starting from the current
    /// feasible basis.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool], pivots: &mut usize) -> Result<()> {
        loop {
            // reduced costs: c_j - c_B B^-1 A_j (the tableau already holds B^-1 A)
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j];
                for r in 0..self.rows {
                    rc -= cost[self.basis[r]] * self.at(r, j);
                }
                if rc < -PIVOT_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let v = self.at(r, j);
                if v > PIVOT_TOL {
                    let ratio = self.rhs(r) / v;
                    leaving = match leaving {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - PIVOT_TOL
                                || (ratio <= lratio + PIVOT_TOL && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leaving else {
                return Err(Error::Lp("objective is unbounded".into()));
            };
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::Lp(format!("no optimum after {MAX_PIVOTS} pivots")));
            }
            self.pivot(r, j);
        }
    }
}

/// Minimize `cost . x` subject to `constraints` and `x >= 0`.
pub fn solve_lp(cost: &[f64], constraints: &[Constraint]) -> Result<LpSolution> {
    let n = cost.len();
    if let Some(c) = constraints.iter().find(|c| c.coeffs.len() != n) {
        return Err(Error::LengthMismatch {
            what: "constraint coefficients",
            expected: n,
            found: c.coeffs.len(),
        });
    }
    if cost.iter().chain(constraints.iter().flat_map(|c| c.coeffs.iter().chain([&c.rhs]))).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("linear program data"));
    }

    // Flip rows so every right-hand side is nonnegative.
    let rows: Vec<(Vec<f64>, Relation, f64)> = constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|v| -v).collect(), rel, -c.rhs)
            } else {
                (c.coeffs.clone(), c.relation, c.rhs)
            }
        })
        .collect();

    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = n + slacks + artificials;
    let w = cols + 1;
    let mut a = vec![0.0; m * w];
    let mut basis = vec![0; m];
    let (mut next_slack, mut next_art) = (n, n + slacks);
    for (r, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        a[r * w..r * w + n].copy_from_slice(coeffs);
        a[r * w + cols] = *rhs;
        match rel {
            Relation::Le => {
                a[r * w + next_slack] = 1.0;
                basis[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                a[r * w + next_slack] = -1.0;
                next_slack += 1;
                a[r * w + next_art] = 1.0;
                basis[r] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                a[r * w + next_art] = 1.0;
                basis[r] = next_art;
                next_art += 1;
            }
        }
    }
    let mut t = Tableau {
        rows: m,
        cols,
        a,
        basis,
    };
    let mut pivots = 0;

    let is_artificial = |j: usize| j >= n + slacks;
    if artificials > 0 {
        let phase1: Vec<f64> = (0..cols).map(|j| if is_artificial(j) { 1.0 } else { 0.0 }).collect();
        t.optimize(&phase1, &vec![true; cols], &mut pivots)?;
        let infeasibility: f64 = (0..m).filter(|&r| is_artificial(t.basis[r])).map(|r| t.rhs(r)).sum();
        if infeasibility > 1e-9 {
            return Err(Error::Lp(format!("infeasible (phase one residual {infeasibility:e})")));
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if is_artificial(t.basis[r]) {
                if let Some(j) = (0..n + slacks).find(|&j| t.at(r, j).abs() > PIVOT_TOL && !t.basis.contains(&j)) {
                    t.pivot(r, j);
                }
            }
        }
    }
    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(cost);
    let allowed: Vec<bool> = (0..cols).map(|j| !is_artificial(j)).collect();
    t.optimize(&phase2, &allowed, &mut pivots)?;

    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs(r).max(0.0);
        }
    }
    let objective = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { x, objective })
}

/// One region per distinct trace of an interval on the sorted joint support,
/// followed by the complements (the complement of the full support, the empty
/// set, is left out).
pub fn canonical_regions_1d(q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<Vec<Vec<Vec<f64>>>> {
    let joint = crate::model::JointSupport::sorted_1d(q, p)?;
    let n = joint.len();
    let mut regions = Vec::with_capacity(n * (n + 1));
    for i in 0..n {
        for j in i + 1..=n {
            regions.push(joint.points[i..j].to_vec());
        }
    }
    // complements of prefixes and suffixes are intervals already listed
    for i in 1..n {
        for j in i + 1..n {
            let mut c = joint.points[..i].to_vec();
            c.extend_from_slice(&joint.points[j..]);
            regions.push(c);
        }
    }
    Ok(regions)
}

/// `min δ` s.t. `|Q'(a) - P(a)| <= δ` for every region `a`, `Q'` a reweighting
/// of the source support.
///
/// Regions inducing the same set of source points only contribute their
/// largest and smallest target mass. `achieved_disc` is the LP optimum;
/// `lower_bound` is the largest target mass of a region with no source point.
pub fn minimize_01_lp(q: &WeightedEmpirical, p: &WeightedEmpirical, regions: &[Vec<Vec<f64>>]) -> Result<ReweightResult> {
    q.require_dim(p)?;
    if regions.is_empty() {
        return Err(Error::param("regions", "at least one region is required"));
    }
    let m0 = q.len();
    let source: HashMap<Vec<u64>, usize> = q.points().iter().enumerate().map(|(i, x)| (point_key(x), i)).collect();
    let target: HashMap<Vec<u64>, f64> = p.points().iter().zip(p.weights()).map(|(x, w)| (point_key(x), *w)).collect();

    // source mask -> (min P(a), max P(a))
    let mut groups: Vec<(Vec<bool>, f64, f64)> = Vec::new();
    let mut index: HashMap<Vec<bool>, usize> = HashMap::new();
    for region in regions {
        let mut mask = vec![false; m0];
        let mut mass = 0.0;
        for x in region {
            if x.len() != q.dim() {
                return Err(Error::DimensionMismatch {
                    expected: q.dim(),
                    found: x.len(),
                });
            }
            let key = point_key(x);
            if let Some(&i) = source.get(&key) {
                mask[i] = true;
            }
            mass += target.get(&key).copied().unwrap_or(0.0);
        }
        match index.get(&mask) {
            Some(&g) => {
                groups[g].1 = groups[g].1.min(mass);
                groups[g].2 = groups[g].2.max(mass);
            }
            None => {
                index.insert(mask.clone(), groups.len());
                groups.push((mask, mass, mass));
            }
        }
    }

    let lower_bound = groups
        .iter()
        .filter(|g| g.0.iter().all(|b| !b))
        .map(|g| g.2)
        .fold(0.0, f64::max);

    // variables: z_1..z_m0, δ
    let coeffs = |mask: &[bool], sign: f64| -> Vec<f64> {
        mask.iter().map(|&b| if b { sign } else { 0.0 }).chain([1.0]).collect()
    };
    let mut constraints = vec![Constraint {
        coeffs: (0..m0).map(|_| 1.0).chain([0.0]).collect(),
        relation: Relation::Eq,
        rhs: 1.0,
    }];
    for (mask, lo, hi) in &groups {
        // Q'(a) - δ <= min P(a)   and   Q'(a) + δ >= max P(a)
        let mut up = coeffs(mask, 1.0);
        up[m0] = -1.0;
        constraints.push(Constraint {
            coeffs: up,
            relation: Relation::Le,
            rhs: *lo,
        });
        constraints.push(Constraint {
            coeffs: coeffs(mask, 1.0),
            relation: Relation::Ge,
            rhs: *hi,
        });
    }
    let mut cost = vec![0.0; m0 + 1];
    cost[m0] = 1.0;
    let sol = solve_lp(&cost, &constraints)?;
    let weights = SimplexVector::from_unnormalized(sol.x[..m0].to_vec())?;
    Ok(ReweightResult {
        weights,
        achieved_disc: sol.objective,
        lower_bound,
        trace: Vec::new(),
        converged: true,
        flags: Vec::new(),
    })
}

/// LP over the canonical 1D regions; the value is double-checked against the
/// interval scan of the returned reweighting.
pub fn minimize_01_lp_1d(q: &WeightedEmpirical, p: &WeightedEmpirical) -> Result<ReweightResult> {
    let regions = canonical_regions_1d(q, p)?;
    let mut r = minimize_01_lp(q, p, &regions)?;
    let rescanned = disc_01_threshold1d(&q.reweighted(r.weights.as_slice())?, p)?.value;
    if (rescanned - r.achieved_disc).abs() > 1e-9 {
        r.flags.push(format!("lp value {} differs from rescanned discrepancy {rescanned}", r.achieved_disc));
    }
    r.lower_bound = one_d::unlabeled_lower_bound(q, p)?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[f64], relation: Relation, rhs: f64) -> Constraint {
        Constraint {
            coeffs: coeffs.to_vec(),
            relation,
            rhs,
        }
    }

    #[test]
    fn textbook_lp() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  => (2, 6), 36
        let sol = solve_lp(
            &[-3.0, -5.0],
            &[
                row(&[1.0, 0.0], Relation::Le, 4.0),
                row(&[0.0, 2.0], Relation::Le, 12.0),
                row(&[3.0, 2.0], Relation::Le, 18.0),
            ],
        )
        .unwrap();
        assert!((sol.objective + 36.0).abs() < 1e-12);
        assert!((sol.x[0] - 2.0).abs() < 1e-12 && (sol.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y s.t. x + y = 1, y >= 0.25  => (0.75, 0.25), 1.25
        let sol = solve_lp(
            &[1.0, 2.0],
            &[row(&[1.0, 1.0], Relation::Eq, 1.0), row(&[0.0, 1.0], Relation::Ge, 0.25)],
        )
        .unwrap();
        assert!((sol.objective - 1.25).abs() < 1e-12);
        // negative right-hand side gets flipped
        let sol = solve_lp(&[1.0], &[row(&[-1.0], Relation::Le, -2.0)]).unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        assert!(matches!(
            solve_lp(&[1.0], &[row(&[1.0], Relation::Ge, 2.0), row(&[1.0], Relation::Le, 1.0)]),
            Err(Error::Lp(_))
        ));
        assert!(matches!(solve_lp(&[-1.0], &[row(&[1.0], Relation::Ge, 1.0)]), Err(Error::Lp(_))));
    }

    #[test]
    fn degenerate_lp_terminates() {
        // classic cycling example under Dantzig's rule
        let sol = solve_lp(
            &[-0.75, 150.0, -0.02, 6.0],
            &[
                row(&[0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0),
                row(&[0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0),
                row(&[0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0),
            ],
        )
        .unwrap();
        assert!((sol.objective + 0.05).abs() < 1e-12);
    }

    #[test]
    fn three_point_regions() {
        let q = WeightedEmpirical::uniform_scalars(&[0.0, 2.0]).unwrap();
        let p = WeightedEmpirical::uniform_scalars(&[1.0]).unwrap();
        let regions = canonical_regions_1d(&q, &p).unwrap();
        // six intervals plus {s1, s3}
        assert_eq!(regions.len(), 7);
        assert!(regions.contains(&vec![vec![0.0], vec![2.0]]));
        let single = canonical_regions_1d(&p, &p).unwrap();
        assert_eq!(single, vec![vec![vec![1.0]]]);
    }

    #[test]
    fn unlabeled_region_mass_is_optimal() {
        let q = WeightedEmpirical::uniform_scalars(&[0.0, 1.0]).unwrap();
        let p = WeightedEmpirical::from_scalars(&[0.5, 1.0], &[0.25, 0.75]).unwrap();
        let r = minimize_01_lp_1d(&q, &p).unwrap();
        assert!((r.achieved_disc - 0.25).abs() < 1e-12);
        assert_eq!(r.lower_bound, 0.25);
        let same = minimize_01_lp_1d(&q, &q).unwrap();
        assert!(same.achieved_disc.abs() < 1e-12);
    }
}
