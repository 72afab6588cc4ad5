//! Command-line front end: single solves, regularization paths, screening
//! rate grids, per-mode timings and LP-SVM bounds.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use simulscreen::lp_svm::{lp_bounds, lp_screen, project_dual, LpBounds};
use simulscreen::objective::lambda_max;
use simulscreen::path::{
    bench, bench_to_csv, format_sig17, lambda_grid, rate_report, run_path, sig17, HookEntry,
    LossEcho, PathConfig, RateConfig, Timing,
};
use simulscreen::rules::LedgerCounts;
use simulscreen::sparse_data::{parse_libsvm, write_libsvm};
use simulscreen::synth::{generate, SynthConfig};
use simulscreen::{
    solve, Dataset64, Error, FeatureStatus, SampleStatus, ScreeningMode, SolverOptions64, Spec64,
    Task,
};

#[derive(Parser)]
#[command(name = "simulscreen", version, about = "Simultaneous safe screening for sparse linear models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single lambda.
    Train(TrainArgs),
    /// Solve a descending lambda grid with warm starts.
    Path(PathArgs),
    /// Screening and keeping rates against reference solutions.
    Rates(RatesArgs),
    /// Path cost for every screening mode.
    Bench(BenchArgs),
    /// Feature and sample bounds of the LP-based SVM.
    LpBounds(LpArgs),
    /// Write a seeded synthetic dataset in LIBSVM format.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Clf,
    Reg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Off,
    Feature,
    Sample,
    Simul,
}

impl From<ModeArg> for ScreeningMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Off => ScreeningMode::Off,
            ModeArg::Feature => ScreeningMode::Feature,
            ModeArg::Sample => ScreeningMode::Sample,
            ModeArg::Simul => ScreeningMode::Simultaneous,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairArg {
    /// `w = 0`, `alpha = 0`.
    Zero,
    /// Smoothed-hinge solution at the same lambda, projected to feasibility.
    Smoothed,
}

#[derive(Args)]
struct DataArgs {
    /// LIBSVM file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "clf")]
    task: TaskArg,
    /// Loss smoothing; defaults to 0.5 (clf) or 0.1 (reg).
    #[arg(long)]
    gamma: Option<f64>,
    /// Insensitivity width for regression.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "simul")]
    mode: ModeArg,
    /// Absolute duality-gap tolerance; default 1e-6 * max(1, P(w_init)).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    trigger: f64,
    #[arg(long, default_value_t = 0.95)]
    stop_rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    max_epochs: usize,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 100)]
    lambda_count: usize,
    #[arg(long, default_value_t = 1e-4)]
    lambda_min_ratio: f64,
}

#[derive(Args)]
struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    lambda: f64,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct PathArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct RatesArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Gap thresholds relative to P(0), comma separated; 0 means the
    /// reference solution itself.
    #[arg(long, value_delimiter = ',', default_value = "1,1e-1,1e-2,1e-3,1e-4,1e-5,1e-6")]
    gap_levels: Vec<f64>,
    #[arg(long, default_value_t = 1e-12)]
    reference_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct LpArgs {
    /// LIBSVM file with +1/-1 labels.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "zero")]
    pair: PairArg,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    #[arg(long, value_enum, default_value = "clf")]
    task: TaskArg,
    #[arg(long, default_value_t = 10)]
    informative: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
    NotConverged,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Path(a) => path(a),
        Command::Rates(a) => rates(a),
        Command::Bench(a) => bench_cmd(a),
        Command::LpBounds(a) => lp(a),
        Command::Gen(a) => gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::NotConverged) => {
            eprintln!("error: solver did not reach the requested gap");
            ExitCode::from(3)
        }
    }
}

fn task_of(t: TaskArg) -> Task {
    match t {
        TaskArg::Clf => Task::Classification,
        TaskArg::Reg => Task::Regression,
    }
}

fn load(path: &PathBuf, task: Task) -> Result<Dataset64, Failure> {
    let file = File::open(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let data = parse_libsvm(BufReader::new(file), task)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    if data.n() == 0 || data.d() == 0 {
        return Err(Failure::Data(format!("{}: empty dataset", path.display())));
    }
    Ok(data)
}

/// Loss template; `lambda` is a placeholder until the grid is known.
fn spec_of(a: &DataArgs, lambda: f64) -> Result<Spec64, Failure> {
    let task = task_of(a.task);
    let gamma = a.gamma.unwrap_or(match task {
        Task::Classification => 0.5,
        Task::Regression => 0.1,
    });
    Ok(Spec64::new(task, gamma, if task == Task::Regression { a.eps } else { 0.0 }, lambda)?)
}

fn options(a: &SolveArgs) -> SolverOptions64 {
    SolverOptions64 {
        tol: a.tol,
        max_epochs: a.max_epochs,
        seed: a.seed,
        mode: a.mode.into(),
        trigger: a.trigger,
        stop_rate: a.stop_rate,
        ..SolverOptions64::default()
    }
}

fn path_config(g: &GridArgs, s: &SolveArgs) -> PathConfig {
    PathConfig {
        lambda_count: g.lambda_count,
        min_ratio: g.lambda_min_ratio,
        mode: s.mode.into(),
        tol: s.tol,
        trigger: s.trigger,
        stop_rate: s.stop_rate,
        seed: s.seed,
        max_epochs: s.max_epochs,
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(p) => {
            let mut f = File::create(p)
                .map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            f.write_all(text.as_bytes())?;
        }
        None => {
            let mut s = io::stdout().lock();
            s.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::Data(e.to_string()))
}

#[derive(Serialize)]
struct TrainReport {
    loss: LossEcho,
    #[serde(serialize_with = "sig17")]
    lambda: f64,
    n: usize,
    d: usize,
    mode: ScreeningMode,
    epochs: usize,
    converged: bool,
    #[serde(serialize_with = "sig17")]
    gap: f64,
    #[serde(serialize_with = "sig17")]
    primal: f64,
    #[serde(serialize_with = "sig17")]
    dual: f64,
    nnz_w: usize,
    /// `(feature, weight)` for every nonzero weight.
    w: Vec<SparseEntry>,
    counts: LedgerCounts,
    hooks: Vec<HookEntry>,
    work: u64,
    timing: Timing,
}

#[derive(Serialize)]
struct SparseEntry(usize, #[serde(serialize_with = "sig17")] f64);

fn train(a: TrainArgs) -> Outcome {
    let spec = spec_of(&a.data, a.lambda)?;
    let data = load(&a.data.data, spec.task)?;
    let opts = options(&a.solve);
    let out = solve(&spec, &data, None, &opts, None);
    let w: Vec<SparseEntry> = out
        .pair
        .w
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(j, &w)| SparseEntry(j, w))
        .collect();
    let report = TrainReport {
        loss: LossEcho::of(&spec),
        lambda: a.lambda,
        n: data.n(),
        d: data.d(),
        mode: opts.mode,
        epochs: out.epochs,
        converged: out.converged,
        gap: out.gap,
        primal: out.pair.primal,
        dual: out.pair.dual,
        nnz_w: w.len(),
        w,
        counts: out.ledger.counts(),
        hooks: out
            .hooks
            .iter()
            .map(|h| HookEntry {
                epoch: h.epoch,
                gap: h.gap,
                rounds: h.rounds,
                features_screened: h.decided.features_screened,
                features_kept: h.decided.features_kept,
                samples_zero: h.decided.samples_zero,
                samples_bound: h.decided.samples_bound,
                samples_kept: h.decided.samples_kept,
            })
            .collect(),
        work: out.work,
        timing: Timing {
            rule_seconds: out.rule_seconds,
            solve_seconds: out.solve_seconds,
        },
    };
    let text = match a.out.format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let c = report.counts;
            format!(
                "lambda,epochs,converged,gap,primal,dual,nnz_w,features_screened,features_kept,samples_zero,samples_bound,samples_kept,work\n{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                format_sig17(report.lambda),
                report.epochs,
                report.converged,
                format_sig17(report.gap),
                format_sig17(report.primal),
                format_sig17(report.dual),
                report.nnz_w,
                c.features_screened,
                c.features_kept,
                c.samples_zero,
                c.samples_bound,
                c.samples_kept,
                report.work
            )
        }
    };
    emit(&a.out.out, &text)?;
    if out.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn path(a: PathArgs) -> Outcome {
    let spec = spec_of(&a.data, 1.0)?;
    let data = load(&a.data.data, spec.task)?;
    let cfg = path_config(&a.grid, &a.solve);
    let run = run_path(&spec, &data, &cfg)?;
    let text = match a.out.format {
        Format::Json => {
            let mut s = run.report.to_json()?;
            s.push('\n');
            s
        }
        Format::Csv => run.report.to_csv()?,
    };
    emit(&a.out.out, &text)?;
    if run.report.all_converged {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn rates(a: RatesArgs) -> Outcome {
    let spec = spec_of(&a.data, 1.0)?;
    let data = load(&a.data.data, spec.task)?;
    let cfg = PathConfig {
        lambda_count: a.grid.lambda_count,
        min_ratio: a.grid.lambda_min_ratio,
        ..PathConfig::default()
    };
    cfg.validate()?;
    let lmax = lambda_max(&data)?;
    if !(lmax > 0.0) {
        return Err(Failure::Data("lambda_max is zero; the data carries no signal".into()));
    }
    let lambdas = lambda_grid(lmax, cfg.lambda_count, cfg.min_ratio);
    let rc = RateConfig {
        gap_levels: a.gap_levels,
        reference_tol: a.reference_tol,
        seed: a.seed,
        ..RateConfig::default()
    };
    let grid = rate_report(&spec, &data, &lambdas, &rc)?;
    let text = match a.format {
        Format::Json => {
            let mut s = grid.to_json()?;
            s.push('\n');
            s
        }
        Format::Csv => grid.to_csv()?,
    };
    emit(&a.out, &text)
}

fn bench_cmd(a: BenchArgs) -> Outcome {
    let spec = spec_of(&a.data, 1.0)?;
    let data = load(&a.data.data, spec.task)?;
    let cfg = path_config(&a.grid, &a.solve);
    let modes = [
        ScreeningMode::Off,
        ScreeningMode::Feature,
        ScreeningMode::Sample,
        ScreeningMode::Simultaneous,
    ];
    let entries = bench(&spec, &data, &cfg, &modes)?;
    let text = match a.out.format {
        Format::Json => json(&entries)?,
        Format::Csv => bench_to_csv(&entries)?,
    };
    emit(&a.out.out, &text)
}

#[derive(Serialize)]
struct LpRow {
    kind: &'static str,
    index: usize,
    #[serde(serialize_with = "sig17")]
    lb: f64,
    #[serde(serialize_with = "sig17")]
    ub: f64,
    decision: &'static str,
}

fn lp_rows(data: &Dataset64, lambda: f64, b: &LpBounds<f64>) -> Vec<LpRow> {
    let ledger = lp_screen(data, lambda, b);
    let mut rows = Vec::with_capacity(b.features.len() + b.samples.len());
    for (j, &(lb, ub)) in b.features.iter().enumerate() {
        rows.push(LpRow {
            kind: "feature",
            index: j,
            lb,
            ub,
            decision: match ledger.feature(j) {
                FeatureStatus::ScreenedZero => "zero",
                _ => "unknown",
            },
        });
    }
    for (i, &(lb, ub)) in b.samples.iter().enumerate() {
        rows.push(LpRow {
            kind: "sample",
            index: i,
            lb,
            ub,
            decision: match ledger.sample(i) {
                SampleStatus::ScreenedAt(p) => match p {
                    simulscreen::Pin::Zero => "alpha=0",
                    simulscreen::Pin::Plus => "alpha=+1",
                    simulscreen::Pin::Minus => "alpha=-1",
                },
                _ => "unknown",
            },
        });
    }
    rows
}

fn lp(a: LpArgs) -> Outcome {
    if !(a.lambda > 0.0) {
        return Err(Failure::Usage(format!("lambda must be > 0, got {}", a.lambda)));
    }
    let data = load(&a.data, Task::Classification)?;
    let (w, alpha) = match a.pair {
        PairArg::Zero => (vec![0.0; data.d()], vec![0.0; data.n()]),
        PairArg::Smoothed => {
            let spec = Spec64::classification(0.5, a.lambda)?;
            let out = solve(&spec, &data, None, &SolverOptions64::default(), None);
            let alpha = project_dual(&data, a.lambda, &out.pair.alpha);
            (out.pair.w, alpha)
        }
    };
    let b = lp_bounds(&data, a.lambda, &w, &alpha)?;
    let rows = lp_rows(&data, a.lambda, &b);
    let text = match a.out.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut s = String::from("kind,index,lb,ub,decision\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.kind,
                    r.index,
                    format_sig17(r.lb),
                    format_sig17(r.ub),
                    r.decision
                ));
            }
            s
        }
    };
    emit(&a.out.out, &text)
}

fn gen(a: GenArgs) -> Outcome {
    let cfg = SynthConfig {
        n: a.n,
        d: a.d,
        density: a.density,
        task: task_of(a.task),
        informative: a.informative,
        noise: a.noise,
        seed: a.seed,
    };
    let data: Dataset64 = generate(&cfg)?;
    emit(&a.out, &write_libsvm(&data))
}
