//! `discadapt`: discrepancy, reweighting, Rademacher and bound calculators, and
//! the two shifted-Gaussian experiments.
//!
//! Results go to stdout as JSON. Exit codes: 0 success, 2 bad input, 3 a
//! solver that did not converge.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use discadapt::discrepancy::{
    bound_value, rademacher, rademacher_montecarlo, BoundInputs, BoundRegistry, EstimatorParams, EstimatorRegistry,
    DEFAULT_MAX_SUPPORT, DEFAULT_TRIALS,
};
use discadapt::experiments::{
    run_experiment_1, run_experiment_2, write_summary_csv, write_trials_csv, CenterLayout, ExperimentConfig, RunRecord,
    SummaryRow,
};
use discadapt::io::{read_sample_file, write_sample_csv, SampleFile};
use discadapt::minimize::{FirstOrderMethod, ReweighterRegistry, SolverConfig};
use discadapt::{Error, HypothesisSpec, Kernel};

#[derive(Parser)]
#[command(name = "discadapt", version, about = "Discrepancy distance and discrepancy-minimizing reweighting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discrepancy between a source and a target sample.
    Disc(DiscArgs),
    /// Reweight the source sample to minimize its discrepancy to the target.
    Minimize(MinimizeArgs),
    /// Empirical Rademacher complexity of a hypothesis class on a sample.
    Rademacher(RademacherArgs),
    /// Evaluate a named bound from `key=value` inputs.
    Bounds(BoundsArgs),
    /// Shifted-Gaussian threshold classification, weighted against unweighted.
    Exp1(Exp1Args),
    /// Shifted-Gaussian ridge regression trained on source, reweighted source
    /// and target.
    Exp2(Exp2Args),
}

#[derive(Args)]
struct ClassArgs {
    /// Loss: `zeroone` or `l2`.
    #[arg(long, default_value = "zeroone")]
    loss: String,
    /// Hypothesis class: `threshold1d`, `linear` or `kernel`. Defaults to
    /// `threshold1d` for the 0-1 loss and `linear` for l2.
    #[arg(long)]
    hypothesis: Option<String>,
    /// `linear`, `gaussian:<gamma>` or `polynomial:<c>:<degree>`.
    #[arg(long, default_value = "linear")]
    kernel: Kernel,
}

impl ClassArgs {
    fn hypothesis(&self) -> &str {
        match (&self.hypothesis, self.loss.as_str()) {
            (Some(h), _) => h,
            (None, "l2") => "linear",
            (None, _) => "threshold1d",
        }
    }
}

#[derive(Args)]
struct DiscArgs {
    #[command(flatten)]
    class: ClassArgs,
    /// Estimator by registry name; overrides --loss/--hypothesis.
    #[arg(long)]
    estimator: Option<String>,
    /// Largest joint support the brute-force estimators enumerate.
    #[arg(long, default_value_t = DEFAULT_MAX_SUPPORT)]
    max_support: usize,
    source: PathBuf,
    target: PathBuf,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1.0)]
    eta0: f64,
    /// `mirror-prox` or `subgradient`.
    #[arg(long, default_value = "mirror-prox")]
    method: FirstOrderMethod,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            eta0: self.eta0,
            tol: self.tol,
            seed,
            method: self.method,
            warm_start: None,
        }
    }
}

#[derive(Args)]
struct MinimizeArgs {
    #[command(flatten)]
    class: ClassArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Expected input dimension; checked against the files.
    #[arg(long)]
    dim: Option<usize>,
    /// Reweighting method by registry name (`1d`, `lp`, `l2-linear`,
    /// `l2-kernel`); overrides --loss/--hypothesis.
    #[arg(long)]
    reweighter: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include the per-iteration objective trace.
    #[arg(long)]
    trace: bool,
    /// Write the reweighted source sample (with a `w` column) here.
    #[arg(long)]
    out: Option<PathBuf>,
    source: PathBuf,
    target: PathBuf,
}

#[derive(Args)]
struct RademacherArgs {
    #[arg(long, default_value = "threshold1d")]
    hypothesis: String,
    #[arg(long, default_value = "linear")]
    kernel: Kernel,
    /// Monte Carlo draws when the sample is too large to enumerate.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use Monte Carlo even for small samples.
    #[arg(long)]
    monte_carlo: bool,
    sample: PathBuf,
}

#[derive(Args)]
struct BoundsArgs {
    /// List the registered bounds and their inputs.
    #[arg(long)]
    list: bool,
    name: Option<String>,
    /// Inputs as `key=value`.
    inputs: Vec<String>,
}

#[derive(Args)]
struct ExpArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    /// Labeled sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Unlabeled size; ten times m when absent.
    #[arg(long)]
    n: Option<usize>,
    /// Summary curve CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-trial CSV.
    #[arg(long)]
    trials_out: Option<PathBuf>,
}

#[derive(Args)]
struct Exp1Args {
    #[command(flatten)]
    exp: ExpArgs,
}

#[derive(Args)]
struct Exp2Args {
    #[command(flatten)]
    exp: ExpArgs,
    /// Input dimension: 2 or 16.
    #[arg(long, default_value_t = 2)]
    n_dim: usize,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// `per-coordinate` or `norm-preserving`.
    #[arg(long, default_value = "per-coordinate")]
    layout: CenterLayout,
    #[command(flatten)]
    solver: SolverArgs,
}

enum Failure {
    Input(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EigenNoConvergence { .. } | Error::Lp(_) => Failure::Solver(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn input(message: impl Into<String>) -> Failure {
    Failure::Input(message.into())
}

fn load(path: &Path) -> Result<SampleFile, Failure> {
    read_sample_file(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T) -> Outcome {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| input(e.to_string()))?;
    writeln!(out).map_err(|e| input(e.to_string()))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| input(format!("{}: {e}", path.display())))
}

fn disc(args: &DiscArgs) -> Outcome {
    let name = match &args.estimator {
        Some(n) => n.as_str(),
        None => EstimatorRegistry::resolve(&args.class.loss, args.class.hypothesis())?,
    };
    let params = EstimatorParams {
        kernel: args.class.kernel,
        max_support: args.max_support,
    };
    let estimator = EstimatorRegistry::with_builtins().create(name, &params)?;
    let q = load(&args.source)?.to_empirical()?;
    let p = load(&args.target)?.to_empirical()?;
    emit(&estimator.estimate(&q, &p)?)
}

#[derive(Serialize)]
struct MinimizeOutput<'a> {
    method: &'a str,
    weights: &'a [f64],
    achieved_disc: f64,
    lower_bound: f64,
    converged: bool,
    flags: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [f64]>,
}

fn minimize(args: &MinimizeArgs) -> Outcome {
    let name = match &args.reweighter {
        Some(n) => n.as_str(),
        None => ReweighterRegistry::resolve(&args.class.loss, args.class.hypothesis())?,
    };
    let method = ReweighterRegistry::with_builtins().create(name, &args.class.kernel)?;
    let source = load(&args.source)?;
    let target = load(&args.target)?;
    if let Some(d) = args.dim {
        for (path, f) in [(&args.source, &source), (&args.target, &target)] {
            if f.dim() != d {
                return Err(input(format!("{}: has {} columns of x, expected {d}", path.display(), f.dim())));
            }
        }
    }
    let q = source.to_empirical()?;
    let p = target.to_empirical()?;
    let r = method.reweight(&q, &p, &args.solver.config(args.seed))?;
    if let Some(path) = &args.out {
        let file = SampleFile {
            points: q.points().to_vec(),
            labels: None,
            weights: Some(r.weights.as_slice().to_vec()),
        };
        let mut w = create(path)?;
        write_sample_csv(&mut w, &file)?;
    }
    emit(&MinimizeOutput {
        method: name,
        weights: r.weights.as_slice(),
        achieved_disc: r.achieved_disc,
        lower_bound: r.lower_bound,
        converged: r.converged,
        flags: &r.flags,
        trace: args.trace.then_some(r.trace.as_slice()),
    })?;
    if r.converged {
        Ok(())
    } else {
        Err(Failure::Solver("reweighting did not converge".into()))
    }
}

fn hypothesis_spec(name: &str, kernel: Kernel, dim: usize) -> Result<HypothesisSpec, Failure> {
    match name {
        "threshold1d" => Ok(HypothesisSpec::Threshold1D),
        "linear" => Ok(HypothesisSpec::LinearBounded { dim }),
        "kernel" => Ok(HypothesisSpec::KernelBounded { kernel }),
        other => Err(input(format!("unknown hypothesis class `{other}`"))),
    }
}

fn rademacher_cmd(args: &RademacherArgs) -> Outcome {
    let sample = load(&args.sample)?;
    let h = hypothesis_spec(&args.hypothesis, args.kernel, sample.dim())?;
    let estimate = if args.monte_carlo {
        rademacher_montecarlo(&h, &sample.points, args.trials, args.seed)?
    } else {
        rademacher(&h, &sample.points, args.trials, args.seed)?
    };
    emit(&estimate)
}

#[derive(Serialize)]
struct BoundListing<'a> {
    name: &'a str,
    inputs: &'a [&'static str],
    description: &'a str,
}

fn bounds(args: &BoundsArgs) -> Outcome {
    if args.list {
        let registry = BoundRegistry::with_builtins();
        let listing: Vec<BoundListing> = registry
            .iter()
            .map(|b| BoundListing {
                name: b.name(),
                inputs: b.symbols(),
                description: b.description(),
            })
            .collect();
        return emit(&listing);
    }
    let name = args
        .name
        .as_deref()
        .ok_or_else(|| input("a bound name is required (see --list)"))?;
    let mut inputs = BoundInputs::new();
    for pair in &args.inputs {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| input(format!("expected key=value, got `{pair}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| input(format!("`{key}`: `{value}` is not a number")))?;
        inputs.set(key.trim(), value);
    }
    emit(&bound_value(name, &inputs)?)
}

#[derive(Serialize)]
struct ExperimentOutput<'a> {
    config: &'a ExperimentConfig,
    summary: &'a [SummaryRow],
    flags: &'a [String],
}

fn apply_common(cfg: &mut ExperimentConfig, exp: &ExpArgs) {
    if let Some(t) = exp.trials {
        cfg.trials = t;
    }
    if let Some(m) = &exp.m {
        cfg.ms = m.clone();
    }
    cfg.n = exp.n;
}

fn report(record: &RunRecord, exp: &ExpArgs) -> Outcome {
    if let Some(path) = &exp.out {
        write_summary_csv(create(path)?, record)?;
    }
    if let Some(path) = &exp.trials_out {
        write_trials_csv(create(path)?, record)?;
    }
    emit(&ExperimentOutput {
        config: &record.config,
        summary: &record.summary,
        flags: &record.flags,
    })
}

fn exp1(args: &Exp1Args) -> Outcome {
    let mut cfg = ExperimentConfig::experiment_1(args.exp.seed, 20);
    apply_common(&mut cfg, &args.exp);
    cfg.validate()?;
    report(&run_experiment_1(&cfg)?, &args.exp)
}

fn exp2(args: &Exp2Args) -> Outcome {
    let mut cfg = ExperimentConfig::experiment_2(args.n_dim, args.exp.seed, 10);
    apply_common(&mut cfg, &args.exp);
    cfg.lambda = args.lambda;
    cfg.layout = args.layout;
    cfg.solver = args.solver.config(args.exp.seed);
    cfg.validate()?;
    report(&run_experiment_2(&cfg)?, &args.exp)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Disc(a) => disc(a),
        Command::Minimize(a) => minimize(a),
        Command::Rademacher(a) => rademacher_cmd(a),
        Command::Bounds(a) => bounds(a),
        Command::Exp1(a) => exp1(a),
        Command::Exp2(a) => exp2(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}
