//! `ssd`: instance generation, solving, sweeps, cue statistics and plots.
//!
//! Exit codes: 0 success, 1 runtime or solver failure, 2 usage, config or
//! schema error. `CS_WORKERS` sets the sweep worker count.

mod plot;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use ssd_core::harness::{cue_experiment, run_sweep_with_workers};
use ssd_core::io::{self, FormatError};
use ssd_core::linalg::{condition_number, mat_vec, norm1};
use ssd_core::problems::{
    gen_correlated_matrix, gen_gaussian_matrix, gen_planted_signal, is_success, relative_distance,
};
use ssd_core::solvers::solve;
use ssd_core::{Error, GuidanceEngine, Method, SignalKind, SolverParams};

use plot::PlotKind;

#[derive(Parser)]
#[command(
    name = "ssd",
    version,
    about = "Sparse recovery by shortest-solution guided decimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Gaussian or correlated sampling matrix.
    GenMatrix(GenMatrixArgs),
    /// Generate a planted sparse signal.
    GenSignal(GenSignalArgs),
    /// Compute z = D h for a matrix and a signal.
    Measure(MeasureArgs),
    /// Recover a sparse solution of D h = z.
    Solve(SolveArgs),
    /// Run a sparsity sweep described by a config file.
    Sweep(SweepArgs),
    /// Rank statistics of the minimum-norm guidance vector.
    Cue(CueArgs),
    /// Write the per-step residual trace of one solve.
    Trace(TraceArgs),
    /// Render a CSV produced by sweep, cue or trace as SVG.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum MatrixKind {
    Gaussian,
    Correlated,
}

#[derive(Args)]
struct GenMatrixArgs {
    #[arg(long, value_enum)]
    kind: MatrixKind,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Inner dimension of the correlated product.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Print the condition number ("inf" when rank deficient).
    #[arg(long)]
    report_q: bool,
}

#[derive(Args)]
struct GenSignalArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value = "gaussian")]
    kind: SignalKind,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[group(skip)]
struct SystemArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Ground-truth signal; z is computed from it and Δ is reported.
    #[arg(
        long,
        required_unless_present = "measurement",
        conflicts_with = "measurement"
    )]
    signal: Option<PathBuf>,
    #[arg(long)]
    measurement: Option<PathBuf>,
    #[arg(long, default_value = "ssd")]
    solver: Method,
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, default_value = "direct")]
    engine: GuidanceEngine,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CueArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    rho_list: Vec<f64>,
    #[arg(long, default_value = "gaussian")]
    kind: SignalKind,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: PlotKind,
    #[arg(long)]
    out: PathBuf,
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 2,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = if let Some(e) = error.downcast_ref::<FormatError>() {
            if matches!(e, FormatError::Io(_)) {
                1
            } else {
                2
            }
        } else if let Some(e) = error.downcast_ref::<Error>() {
            if matches!(e, Error::InvalidArgument(_)) {
                2
            } else {
                1
            }
        } else {
            1
        };
        Self { code, error }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        anyhow::Error::from(e).into()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::GenMatrix(a) => gen_matrix(a),
        Command::GenSignal(a) => gen_signal(a),
        Command::Measure(a) => measure(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Cue(a) => cue(a),
        Command::Trace(a) => trace(a),
        Command::Plot(a) => plot_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn create(path: &Path) -> std::result::Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(|e| Failure { code: 1, error: e })
}

fn open(path: &Path) -> std::result::Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(|e| Failure { code: 1, error: e })
}

fn finish(mut w: BufWriter<File>) -> CmdResult {
    w.flush().context("write failed")?;
    Ok(())
}

fn format_q(q: f64) -> String {
    if q.is_infinite() {
        "inf".into()
    } else {
        format!("{q:.6e}")
    }
}

fn gen_matrix(a: GenMatrixArgs) -> CmdResult {
    let (d, mut comments) = match a.kind {
        MatrixKind::Gaussian => (
            gen_gaussian_matrix(a.rows, a.cols, a.seed)?,
            vec!["generator=gaussian".to_string()],
        ),
        MatrixKind::Correlated => {
            let rank = a.rank.ok_or_else(|| {
                Failure::usage(anyhow::anyhow!("--kind correlated requires --rank"))
            })?;
            (
                gen_correlated_matrix(a.rows, rank, a.cols, a.seed)?,
                vec!["generator=correlated".to_string(), format!("rank={rank}")],
            )
        }
    };
    comments.push(format!("rows={}", a.rows));
    comments.push(format!("cols={}", a.cols));
    comments.push(format!("matrix_seed={}", a.seed));
    let q = if a.report_q {
        let q = condition_number(&d)?;
        comments.push(format!("q={}", format_q(q)));
        Some(q)
    } else {
        None
    };
    let mut w = create(&a.out)?;
    io::write_matrix(&mut w, &d, &comments).context("write failed")?;
    finish(w)?;
    println!("wrote {} ({}x{})", a.out.display(), a.rows, a.cols);
    if let Some(q) = q {
        println!("Q {}", format_q(q));
    }
    Ok(())
}

fn gen_signal(a: GenSignalArgs) -> CmdResult {
    let s = gen_planted_signal(a.n, a.rho, a.kind, a.seed)?;
    let comments = vec![
        format!("generator=planted-{}", a.kind),
        format!("n={}", a.n),
        format!("rho={}", a.rho),
        format!("nonzeros={}", s.nonzeros()),
        format!("signal_seed={}", a.seed),
    ];
    let mut w = create(&a.out)?;
    io::write_vector(&mut w, &s.h0, &comments).context("write failed")?;
    finish(w)?;
    println!(
        "wrote {} (n={} nonzeros={})",
        a.out.display(),
        a.n,
        s.nonzeros()
    );
    Ok(())
}

fn measure(a: MeasureArgs) -> CmdResult {
    let (d, mut comments) = io::read_matrix(open(&a.matrix)?)?;
    let (h, _) = io::read_vector(open(&a.signal)?)?;
    let z = mat_vec(&d, &h)?;
    comments.push(format!("measured_from={}", a.signal.display()));
    let mut w = create(&a.out)?;
    io::write_vector(&mut w, &z, &comments).context("write failed")?;
    finish(w)?;
    println!("wrote {} (m={})", a.out.display(), z.len());
    Ok(())
}

struct LoadedSystem {
    d: ssd_core::DenseMatrix,
    z: Vec<f64>,
    truth: Option<Vec<f64>>,
    comments: Vec<String>,
    params: SolverParams,
}

fn load_system(s: &SystemArgs) -> std::result::Result<LoadedSystem, Failure> {
    let (d, comments) = io::read_matrix(open(&s.matrix)?)?;
    let (z, truth) = match (&s.signal, &s.measurement) {
        (Some(p), None) => {
            let (h, _) = io::read_vector(open(p)?)?;
            (mat_vec(&d, &h)?, Some(h))
        }
        (None, Some(p)) => (io::read_vector(open(p)?)?.0, None),
        _ => unreachable!("clap enforces exactly one right-hand side"),
    };
    let mut params = SolverParams::new(s.solver)
        .with_engine(s.engine)
        .with_epsilon(s.epsilon);
    params.max_steps = s.max_steps;
    Ok(LoadedSystem {
        d,
        z,
        truth,
        comments,
        params,
    })
}

fn solve_cmd(a: SolveArgs) -> CmdResult {
    let sys = load_system(&a.system)?;
    let r = solve(&sys.d, &sys.z, &sys.params)?;
    let mut comments = sys.comments.clone();
    comments.push(format!("solver={}", sys.params.method));
    comments.push(format!("steps={}", r.steps));
    let mut w = create(&a.out)?;
    io::write_vector(&mut w, &r.h, &comments).context("write failed")?;
    finish(w)?;
    if let Some(path) = &a.trace {
        let mut w = create(path)?;
        io::write_trace_csv(&mut w, &r.trace, &[format!("solver={}", sys.params.method)])
            .context("write failed")?;
        finish(w)?;
    }
    let dh = mat_vec(&sys.d, &r.h)?;
    let err: Vec<f64> = dh.iter().zip(&sys.z).map(|(a, b)| a - b).collect();
    println!(
        "solver={} K={} converged={} residual={:.6e}",
        sys.params.method,
        r.steps,
        r.converged,
        norm1(&err) / sys.d.rows() as f64
    );
    if let Some(h0) = &sys.truth {
        let delta = relative_distance(&r.h, h0)?;
        let verdict = if is_success(delta) {
            "success"
        } else {
            "failure"
        };
        println!("delta={delta:.6e} {verdict}");
    }
    Ok(())
}

fn workers() -> std::result::Result<usize, Failure> {
    match std::env::var("CS_WORKERS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Failure::usage(anyhow::anyhow!(
                "CS_WORKERS must be a positive integer, got '{v}'"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn sweep(a: SweepArgs) -> CmdResult {
    let text = std::fs::read_to_string(&a.config)
        .with_context(|| format!("cannot read {}", a.config.display()))
        .map_err(|e| Failure { code: 1, error: e })?;
    let config = io::parse_config(&text)?;
    let result = run_sweep_with_workers(&config, workers()?)?;
    let comments: Vec<String> = io::serialize_config(&config)
        .lines()
        .map(|l| l.replace(' ', ""))
        .collect();
    let mut w = create(&a.out)?;
    io::write_sweep_csv(&mut w, &result.rows, &comments).context("write failed")?;
    finish(w)?;
    for r in &result.rows {
        println!(
            "rho={:.4} solver={} s={:.4} delta_mean={:.4e} k_mean={:.2}",
            r.rho, r.solver, r.s, r.delta_mean, r.k_mean
        );
    }
    Ok(())
}

fn cue(a: CueArgs) -> CmdResult {
    let stats = cue_experiment(a.n, a.alpha, &a.rho_list, a.kind, a.samples, a.seed)?;
    let comments = vec![
        format!("n={}", a.n),
        format!("alpha={}", a.alpha),
        format!("kind={}", a.kind),
        format!("samples={}", a.samples),
        format!("seed={}", a.seed),
    ];
    let mut w = create(&a.out)?;
    io::write_cue_csv(&mut w, &stats, &comments).context("write failed")?;
    finish(w)?;
    for s in &stats {
        let at_support = s
            .rank_curve
            .get(s.nonzeros.max(1) - 1)
            .copied()
            .unwrap_or(0.0);
        println!(
            "rho={:.4} p1={:.4} f_rhoN={:.4} f_N={:.4}",
            s.rho,
            s.p1,
            at_support,
            s.rank_curve.last().copied().unwrap_or(0.0)
        );
    }
    Ok(())
}

fn trace(a: TraceArgs) -> CmdResult {
    let sys = load_system(&a.system)?;
    let r = solve(&sys.d, &sys.z, &sys.params)?;
    let mut w = create(&a.out)?;
    io::write_trace_csv(&mut w, &r.trace, &[format!("solver={}", sys.params.method)])
        .context("write failed")?;
    finish(w)?;
    println!(
        "solver={} K={} converged={} final_z_l1_over_m={:.6e}",
        sys.params.method, r.steps, r.converged, r.final_residual_l1
    );
    Ok(())
}

fn plot_cmd(a: PlotArgs) -> CmdResult {
    let figure = plot::load(a.kind, open(&a.input)?)?;
    let mut w = create(&a.out)?;
    w.write_all(figure.to_svg().as_bytes())
        .context("write failed")?;
    finish(w)?;
    println!("wrote {} ({} series)", a.out.display(), figure.series.len());
    Ok(())
}
