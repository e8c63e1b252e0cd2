//! Shifted-Gaussian adaptation experiments.
//!
//! Experiment 1: classification on the line. Source `N(-1, 2^2)`, target
//! `N(+1, 2^2)`, labels `1[-1 <= x <= 1]`, threshold learners trained on the
//! uniform source sample and on the discrepancy-minimizing reweighting.
//!
//! Experiment 2: regression in `N ∈ {2, 16}` dimensions. Source centered at
//! `+c·1`, target at `-c·1` (`c = √2` by default, see [`CenterLayout`]),
//! covariance `2I`, `f(x) = Σ_i (1 - |x_i|)`.
//! Ridge regression on the features `(x, 1)` is trained on the uniform source
//! sample, on its reweighting and on the labeled target sample. The constant
//! feature matters: without it the two distributions have the same second
//! moments and the linear-class discrepancy is zero.
//!
//! Every `(m, trial)` pair draws from its own ChaCha8 stream (see
//! [`trial_rng`]), so results do not depend on scheduling or on which other
//! sizes are run.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{train_weighted_ridge, train_weighted_threshold};
use crate::minimize::{minimize_1d, minimize_l2_linear, SolverConfig};
use crate::model::{LabeledSample, SimplexVector, WeightedEmpirical};

/// Standard deviation of the classification experiment.
pub const STD_DEV_1D: f64 = 2.0;
/// Per-coordinate variance of the regression experiment.
pub const VARIANCE_REGRESSION: f64 = 2.0;
/// Ratio of unlabeled target points to labeled source points.
pub const UNLABELED_RATIO: usize = 10;
/// Ratio of test points to unlabeled target points.
pub const TEST_RATIO: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Classification1d,
    Regression,
}

/// Placement of the regression centers `±c·1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterLayout {
    /// `c = √2` in every dimension.
    #[default]
    PerCoordinate,
    /// `c = 2/√N`: the centers keep norm 2 (and coincide with `±(√2, √2)` for
    /// `N = 2`).
    NormPreserving,
}

impl CenterLayout {
    pub fn shift(&self, dim: usize) -> f64 {
        match self {
            Self::PerCoordinate => std::f64::consts::SQRT_2,
            Self::NormPreserving => 2.0 / (dim as f64).sqrt(),
        }
    }
}

impl std::str::FromStr for CenterLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-coordinate" => Ok(Self::PerCoordinate),
            "norm-preserving" => Ok(Self::NormPreserving),
            _ => Err(Error::param("layout", format!("unknown center layout `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Labeled source sizes.
    pub ms: Vec<usize>,
    /// Unlabeled target size; `10 m` when absent.
    pub n: Option<usize>,
    pub dim: usize,
    pub layout: CenterLayout,
    pub seed: u64,
    pub trials: usize,
    pub lambda: f64,
    pub solver: SolverConfig,
}

impl ExperimentConfig {
    pub fn experiment_1(seed: u64, trials: usize) -> Self {
        Self {
            experiment: Experiment::Classification1d,
            ms: vec![50, 100, 200, 500],
            n: None,
            dim: 1,
            layout: CenterLayout::default(),
            seed,
            trials,
            lambda: 0.1,
            solver: SolverConfig::default(),
        }
    }

    pub fn experiment_2(dim: usize, seed: u64, trials: usize) -> Self {
        Self {
            experiment: Experiment::Regression,
            ms: vec![100, 400, 1600],
            n: None,
            dim,
            layout: CenterLayout::default(),
            seed,
            trials,
            lambda: 0.1,
            solver: SolverConfig::default(),
        }
    }

    pub fn unlabeled(&self, m: usize) -> usize {
        self.n.unwrap_or(UNLABELED_RATIO * m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ms.is_empty() || self.ms.contains(&0) {
            return Err(Error::param("m", "every labeled size must be at least 1"));
        }
        if self.n == Some(0) {
            return Err(Error::param("n", "must be at least 1"));
        }
        if self.trials < 1 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda", "must be positive and finite"));
        }
        match self.experiment {
            Experiment::Classification1d if self.dim != 1 => {
                return Err(Error::param("dim", "the classification experiment is one-dimensional"))
            }
            Experiment::Regression => check_regression_dim(self.dim)?,
            _ => {}
        }
        self.solver.validate()
    }
}

fn check_regression_dim(dim: usize) -> Result<()> {
    if dim != 2 && dim != 16 {
        return Err(Error::param("dim", format!("regression runs in 2 or 16 dimensions, not {dim}")));
    }
    Ok(())
}

/// One metric from one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub m: usize,
    pub trial: usize,
    pub variant: String,
    pub metric: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub m: usize,
    pub variant: String,
    pub metric_mean: f64,
    /// Sample standard deviation (zero for a single trial).
    pub metric_std: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    /// Sorted by `(m, trial)`, variants in a fixed order within a trial.
    pub rows: Vec<TrialRow>,
    pub summary: Vec<SummaryRow>,
    pub flags: Vec<String>,
}

impl RunRecord {
    pub fn summary_for(&self, m: usize, variant: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.m == m && r.variant == variant)
    }

    pub fn metrics(&self, m: usize, variant: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.m == m && r.variant == variant)
            .map(|r| r.metric)
            .collect()
    }
}

/// Data for one trial. Target labels are used only to train the oracle
/// learner and to score predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub source: LabeledSample,
    pub target: LabeledSample,
    pub test: LabeledSample,
}

/// Generator for trial `trial` at size `m`: ChaCha8 seeded with `seed`, on
/// stream `(m << 32) | trial`.
pub fn trial_rng(seed: u64, m: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((m as u64) << 32) | trial as u64);
    rng
}

pub fn interval_label(x: f64) -> f64 {
    if (-1.0..=1.0).contains(&x) {
        1.0
    } else {
        0.0
    }
}

pub fn regression_target(x: &[f64]) -> f64 {
    x.iter().map(|v| 1.0 - v.abs()).sum()
}

fn draw<R: Rng>(
    rng: &mut R,
    count: usize,
    center: &[f64],
    std_dev: f64,
    label: impl Fn(&[f64]) -> f64,
) -> Result<LabeledSample> {
    let noise = Normal::new(0.0, std_dev).expect("positive standard deviation");
    let points: Vec<Vec<f64>> = (0..count)
        .map(|_| center.iter().map(|c| c + noise.sample(rng)).collect())
        .collect();
    let labels = points.iter().map(|x| label(x)).collect();
    LabeledSample::new(points, labels)
}

pub fn gen_gaussian_1d_with<R: Rng>(rng: &mut R, m: usize, n: usize) -> Result<GeneratedData> {
    let label = |x: &[f64]| interval_label(x[0]);
    Ok(GeneratedData {
        source: draw(rng, m, &[-1.0], STD_DEV_1D, label)?,
        target: draw(rng, n, &[1.0], STD_DEV_1D, label)?,
        test: draw(rng, TEST_RATIO * n, &[1.0], STD_DEV_1D, label)?,
    })
}

/// Source `m` points from `N(-1, 4)`, target `n` points from `N(1, 4)` and a
/// target test set of `10 n` points.
pub fn gen_gaussian_1d(seed: u64, m: usize, n: usize) -> Result<GeneratedData> {
    gen_gaussian_1d_with(&mut ChaCha8Rng::seed_from_u64(seed), m, n)
}

pub fn gen_gaussian_regression_with<R: Rng>(
    rng: &mut R,
    m: usize,
    n: usize,
    dim: usize,
    layout: CenterLayout,
) -> Result<GeneratedData> {
    check_regression_dim(dim)?;
    let shift = layout.shift(dim);
    let source_center = vec![shift; dim];
    let target_center = vec![-shift; dim];
    let sd = VARIANCE_REGRESSION.sqrt();
    Ok(GeneratedData {
        source: draw(rng, m, &source_center, sd, regression_target)?,
        target: draw(rng, n, &target_center, sd, regression_target)?,
        test: draw(rng, TEST_RATIO * n, &target_center, sd, regression_target)?,
    })
}

pub fn gen_gaussian_regression(
    seed: u64,
    m: usize,
    n: usize,
    dim: usize,
    layout: CenterLayout,
) -> Result<GeneratedData> {
    gen_gaussian_regression_with(&mut ChaCha8Rng::seed_from_u64(seed), m, n, dim, layout)
}

/// `(x, 1)`.
pub fn with_bias(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.push(1.0);
    v
}

fn augmented(sample: &LabeledSample) -> Result<LabeledSample> {
    LabeledSample::new(sample.points().iter().map(|x| with_bias(x)).collect(), sample.labels().to_vec())
}

/// Labeled sample on the merged support of `dist`, labeled by `label`.
fn on_support(dist: &WeightedEmpirical, label: impl Fn(&[f64]) -> f64) -> Result<LabeledSample> {
    LabeledSample::new(dist.points().to_vec(), dist.points().iter().map(|x| label(x)).collect())
}

struct TrialOutcome {
    metrics: Vec<(&'static str, f64)>,
    flags: Vec<String>,
}

pub const EXP1_VARIANTS: [&str; 4] = ["unweighted", "weighted", "unweighted-cutoff", "weighted-cutoff"];
pub const EXP2_VARIANTS: [&str; 3] = ["source", "reweighted", "target"];

fn trial_1(cfg: &ExperimentConfig, m: usize, trial: usize) -> Result<TrialOutcome> {
    let data = gen_gaussian_1d_with(&mut trial_rng(cfg.seed, m, trial), m, cfg.unlabeled(m))?;
    let q = WeightedEmpirical::uniform(data.source.points().to_vec())?;
    let p = WeightedEmpirical::uniform(data.target.points().to_vec())?;
    let train = on_support(&q, |x| interval_label(x[0]))?;
    let reweighting = minimize_1d(&q, &p)?;
    let plain = train_weighted_threshold(&train, &SimplexVector::new(q.weights().to_vec())?)?;
    let weighted = train_weighted_threshold(&train, &reweighting.weights)?;
    Ok(TrialOutcome {
        metrics: vec![
            ("unweighted", plain.accuracy(&data.test)),
            ("weighted", weighted.accuracy(&data.test)),
            ("unweighted-cutoff", plain.cutoff),
            ("weighted-cutoff", weighted.cutoff),
        ],
        flags: Vec::new(),
    })
}

fn mse(h: &crate::learners::LinearHypothesis, test: &LabeledSample) -> f64 {
    let total: f64 = test
        .points()
        .iter()
        .zip(test.labels())
        .map(|(x, y)| (h.predict(&with_bias(x)) - y).powi(2))
        .sum();
    total / test.len() as f64
}

fn trial_2(cfg: &ExperimentConfig, m: usize, trial: usize) -> Result<TrialOutcome> {
    let data = gen_gaussian_regression_with(&mut trial_rng(cfg.seed, m, trial), m, cfg.unlabeled(m), cfg.dim, cfg.layout)?;
    let q = WeightedEmpirical::uniform(augmented(&data.source)?.points().to_vec())?;
    let p = WeightedEmpirical::uniform(augmented(&data.target)?.points().to_vec())?;
    // labels are a function of the original coordinates
    let label = |x: &[f64]| regression_target(&x[..x.len() - 1]);
    let source = on_support(&q, label)?;
    let target = on_support(&p, label)?;
    let reweighting = minimize_l2_linear(&q, &p, &cfg.solver)?;
    let mut flags = Vec::new();
    if !reweighting.converged {
        flags.push(format!("m={m} trial={trial}: reweighting did not converge"));
    }
    flags.extend(reweighting.flags.iter().map(|f| format!("m={m} trial={trial}: {f}")));
    let on_source = train_weighted_ridge(&source, &SimplexVector::new(q.weights().to_vec())?, cfg.lambda)?;
    let on_reweighted = train_weighted_ridge(&source, &reweighting.weights, cfg.lambda)?;
    let on_target = train_weighted_ridge(&target, &SimplexVector::new(p.weights().to_vec())?, cfg.lambda)?;
    Ok(TrialOutcome {
        metrics: vec![
            ("source", mse(&on_source, &data.test)),
            ("reweighted", mse(&on_reweighted, &data.test)),
            ("target", mse(&on_target, &data.test)),
        ],
        flags,
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Summary rows recomputed from per-trial rows, in order of first appearance.
pub fn summarize(rows: &[TrialRow], trials: usize, seed: u64) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, &str)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.m, r.variant.as_str())) {
            keys.push((r.m, &r.variant));
        }
    }
    keys.into_iter()
        .map(|(m, variant)| {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| r.m == m && r.variant == variant)
                .map(|r| r.metric)
                .collect();
            let (metric_mean, metric_std) = mean_std(&values);
            SummaryRow {
                m,
                variant: variant.to_string(),
                metric_mean,
                metric_std,
                trials,
                seed,
            }
        })
        .collect()
}

fn run(cfg: &ExperimentConfig, trial: fn(&ExperimentConfig, usize, usize) -> Result<TrialOutcome>) -> Result<RunRecord> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg.ms.iter().flat_map(|&m| (0..cfg.trials).map(move |t| (m, t))).collect();
    let mut outcomes: Vec<((usize, usize), TrialOutcome)> = jobs
        .par_iter()
        .map(|&(m, t)| trial(cfg, m, t).map(|o| ((m, t), o)))
        .collect::<Result<_>>()?;
    outcomes.sort_by_key(|(key, _)| *key);
    let mut rows = Vec::new();
    let mut flags = Vec::new();
    for ((m, t), outcome) in outcomes {
        rows.extend(outcome.metrics.into_iter().map(|(variant, metric)| TrialRow {
            m,
            trial: t,
            variant: variant.to_string(),
            metric,
            seed: cfg.seed,
        }));
        flags.extend(outcome.flags);
    }
    let summary = summarize(&rows, cfg.trials, cfg.seed);
    Ok(RunRecord {
        config: cfg.clone(),
        rows,
        summary,
        flags,
    })
}

/// Accuracy of thresholds trained with and without reweighting, and their
/// cutoffs.
pub fn run_experiment_1(cfg: &ExperimentConfig) -> Result<RunRecord> {
    if cfg.experiment != Experiment::Classification1d {
        return Err(Error::param("experiment", "expected the classification experiment"));
    }
    run(cfg, trial_1)
}

/// Target test MSE of ridge regression trained on the source sample, its
/// reweighting and the target sample.
pub fn run_experiment_2(cfg: &ExperimentConfig) -> Result<RunRecord> {
    if cfg.experiment != Experiment::Regression {
        return Err(Error::param("experiment", "expected the regression experiment"));
    }
    run(cfg, trial_2)
}

fn write_rows<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in rows {
        wtr.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    wtr.flush().map_err(|e| Error::Io(e.to_string()))
}

/// Header `m,variant,metric_mean,metric_std,trials,seed`.
pub fn write_summary_csv<W: Write>(writer: W, record: &RunRecord) -> Result<()> {
    write_rows(writer, &record.summary)
}

/// Header `m,trial,variant,metric,seed`.
pub fn write_trials_csv<W: Write>(writer: W, record: &RunRecord) -> Result<()> {
    write_rows(writer, &record.rows)
}
