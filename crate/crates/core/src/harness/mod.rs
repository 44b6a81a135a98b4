//! Experiment harness: single trials, sparsity sweeps, guidance-cue
//! statistics and residual traces.
//!
//! All randomness is keyed by position (sparsity index, trial index), never by
//! execution order, so sweeps give identical results on any number of
//! workers. Every solver in a sweep sees the same instance at a given slot.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{mat_vec, norm1, DenseMatrix, LeastSquaresParams, PivotedCholesky};
use crate::problems::rng::derive_seed;
use crate::problems::{
    gen_correlated_matrix, gen_gaussian_matrix, gen_planted_signal, is_success, relative_distance,
    support_size, PlantedSignal, ProblemInstance, Provenance, SignalKind,
};
use crate::solvers::{solve, GuidanceEngine, Method, SolveResult, SolverParams, SolverTrace};

/// Sampling-matrix source for a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSpec {
    Gaussian,
    /// Product of Gaussian `M × rank` and `rank × N` factors.
    Correlated {
        rank: usize,
    },
    /// A matrix file in the `CSMAT` format; its shape overrides `n`/`alpha`.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub alpha: f64,
    pub matrix: MatrixSpec,
    pub signal: SignalKind,
    pub rho_grid: Vec<f64>,
    pub trials: usize,
    pub solvers: Vec<Method>,
    pub seed: u64,
    /// One matrix for the whole sweep (true) or a fresh one per trial slot.
    pub fixed_matrix: bool,
    pub epsilon: f64,
    pub engine: GuidanceEngine,
    pub ls_tol: f64,
    pub ls_max_iters: usize,
    /// Record wall-clock solve times. Off by default so output files are reproducible byte for byte.
    pub timing: bool,
}

impl SweepConfig {
    pub fn new(n: usize, rho_grid: Vec<f64>) -> Self {
        Self {
            n,
            alpha: 0.2,
            matrix: MatrixSpec::Gaussian,
            signal: SignalKind::Gaussian,
            rho_grid,
            trials: 100,
            solvers: Method::ALL.to_vec(),
            seed: 0,
            fixed_matrix: true,
            epsilon: 1e-8,
            engine: GuidanceEngine::Direct,
            ls_tol: 1e-10,
            ls_max_iters: 10_000,
            timing: false,
        }
    }

    /// `M = round(alpha · N)`.
    pub fn rows(&self) -> usize {
        support_size(self.n, self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !matches!(self.matrix, MatrixSpec::File(_)) {
            if !(self.alpha > 0.0 && self.alpha < 1.0) {
                return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
            }
            if self.rows() == 0 {
                return bad("alpha * n rounds to zero rows".into());
            }
        }
        if self.rho_grid.is_empty() {
            return bad("rho grid is empty".into());
        }
        if let Some(r) = self.rho_grid.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return bad(format!("rho values must lie in (0, 1), got {r}"));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.solvers.is_empty() {
            return bad("no solvers selected".into());
        }
        if let MatrixSpec::Correlated { rank } = self.matrix {
            if rank == 0 {
                return bad("correlated rank must be positive".into());
            }
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        Ok(())
    }

    pub fn solver_params(&self, method: Method) -> SolverParams {
        SolverParams {
            method,
            epsilon: self.epsilon,
            max_steps: None,
            ls_params: LeastSquaresParams {
                tol: self.ls_tol,
                max_iters: self.ls_max_iters,
                warm_start: None,
            },
            engine: self.engine,
        }
    }
}

/// Result of one solver on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub solver: Method,
    pub delta: f64,
    pub success: bool,
    pub steps: usize,
    pub converged: bool,
    /// `(1/M) ‖D h − z‖₁` against the original system.
    pub residual_l1: f64,
    pub time_s: f64,
    /// Solver error; the trial then counts as a failure with `h = 0` (Δ = 1).
    pub error: Option<String>,
}

/// Solves one instance and scores the result against the planted signal.
pub fn run_trial(instance: &ProblemInstance, params: &SolverParams, timing: bool) -> TrialOutcome {
    let start = Instant::now();
    let result = solve(&instance.matrix, &instance.measurement, params);
    let elapsed = start.elapsed().as_secs_f64();
    let time_s = if timing { elapsed } else { 0.0 };
    let m = instance.matrix.rows() as f64;
    let score = |h: &[f64]| -> (f64, f64) {
        let delta = relative_distance(h, &instance.signal.h0).unwrap_or(f64::INFINITY);
        let dh = mat_vec(&instance.matrix, h).expect("dimensions checked by solve");
        let r: Vec<f64> = dh
            .iter()
            .zip(&instance.measurement)
            .map(|(a, b)| a - b)
            .collect();
        (delta, norm1(&r) / m)
    };
    match result {
        Ok(SolveResult {
            h,
            steps,
            converged,
            ..
        }) => {
            let (delta, residual_l1) = score(&h);
            TrialOutcome {
                solver: params.method,
                delta,
                success: is_success(delta),
                steps,
                converged,
                residual_l1,
                time_s,
                error: None,
            }
        }
        Err(e) => {
            let (delta, residual_l1) = score(&vec![0.0; instance.matrix.cols()]);
            TrialOutcome {
                solver: params.method,
                delta,
                success: false,
                steps: 0,
                converged: false,
                residual_l1,
                time_s,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Aggregated statistics for one (sparsity, solver) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rho: f64,
    pub solver: Method,
    /// Success rate `s`.
    pub s: f64,
    pub delta_mean: f64,
    /// Population standard deviation of Δ.
    pub delta_std: f64,
    pub k_mean: f64,
    pub time_mean_s: f64,
    /// Master seed; per-trial seeds follow from it and the slot indices.
    pub seed: u64,
}

/// Every trial of a sweep, in (rho, trial, solver) order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub rho_index: usize,
    pub trial: usize,
    pub signal_seed: u64,
    pub matrix_seed: Option<u64>,
    pub outcome: TrialOutcome,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub trials: Vec<TrialRecord>,
}

/// Seed of the planted signal at a trial slot.
pub fn signal_seed(master: u64, rho_index: usize, trial: usize) -> u64 {
    derive_seed(master, "signal", &[rho_index as u64, trial as u64])
}

/// Seed of the sampling matrix: one per sweep, or one per trial slot.
pub fn matrix_seed(master: u64, slot: Option<(usize, usize)>) -> u64 {
    match slot {
        None => derive_seed(master, "matrix", &[]),
        Some((r, t)) => derive_seed(master, "matrix", &[r as u64, t as u64]),
    }
}

fn build_matrix(config: &SweepConfig, seed: u64) -> Result<(DenseMatrix, Provenance)> {
    let (m, n) = (config.rows(), config.n);
    match &config.matrix {
        MatrixSpec::Gaussian => Ok((
            gen_gaussian_matrix(m, n, seed)?,
            Provenance {
                generator: "gaussian".into(),
                rows: m,
                cols: n,
                rank: None,
                matrix_seed: Some(seed),
                signal_seed: None,
            },
        )),
        MatrixSpec::Correlated { rank } => Ok((
            gen_correlated_matrix(m, *rank, n, seed)?,
            Provenance {
                generator: "correlated".into(),
                rows: m,
                cols: n,
                rank: Some(*rank),
                matrix_seed: Some(seed),
                signal_seed: None,
            },
        )),
        MatrixSpec::File(path) => {
            let (d, _) = io::read_matrix_file(path)
                .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
            let prov = Provenance {
                generator: format!("file:{}", path.display()),
                rows: d.rows(),
                cols: d.cols(),
                rank: None,
                matrix_seed: None,
                signal_seed: None,
            };
            Ok((d, prov))
        }
    }
}

/// Runs every (rho, trial, solver) combination on the current rayon pool.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let fixed = if config.fixed_matrix || matches!(config.matrix, MatrixSpec::File(_)) {
        let seed = matrix_seed(config.seed, None);
        Some((build_matrix(config, seed)?, seed))
    } else {
        None
    };

    let slots: Vec<(usize, usize)> = (0..config.rho_grid.len())
        .flat_map(|r| (0..config.trials).map(move |t| (r, t)))
        .collect();

    let per_slot: Vec<Result<Vec<TrialRecord>>> = slots
        .par_iter()
        .map(|&(r, t)| {
            let rho = config.rho_grid[r];
            let (matrix, mut prov, mseed) = match &fixed {
                Some(((d, prov), seed)) => (d.clone(), prov.clone(), *seed),
                None => {
                    let seed = matrix_seed(config.seed, Some((r, t)));
                    let (d, prov) = build_matrix(config, seed)?;
                    (d, prov, seed)
                }
            };
            let sseed = signal_seed(config.seed, r, t);
            prov.signal_seed = Some(sseed);
            let signal = gen_planted_signal(matrix.cols(), rho, config.signal, sseed)?;
            let instance = ProblemInstance::new(matrix, signal, prov)?;
            Ok(config
                .solvers
                .iter()
                .map(|&method| TrialRecord {
                    rho_index: r,
                    trial: t,
                    signal_seed: sseed,
                    matrix_seed: instance.provenance.matrix_seed.map(|_| mseed),
                    outcome: run_trial(&instance, &config.solver_params(method), config.timing),
                })
                .collect())
        })
        .collect();

    let mut trials = Vec::with_capacity(slots.len() * config.solvers.len());
    for slot in per_slot {
        trials.extend(slot?);
    }
    Ok(SweepResult {
        rows: aggregate(config, &trials),
        trials,
    })
}

/// Same as [`run_sweep`] on a dedicated pool of `workers` threads.
pub fn run_sweep_with_workers(config: &SweepConfig, workers: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
    pool.install(|| run_sweep(config))
}

fn aggregate(config: &SweepConfig, trials: &[TrialRecord]) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for (r, &rho) in config.rho_grid.iter().enumerate() {
        for &solver in &config.solvers {
            let outs: Vec<&TrialOutcome> = trials
                .iter()
                .filter(|t| t.rho_index == r && t.outcome.solver == solver)
                .map(|t| &t.outcome)
                .collect();
            let count = outs.len() as f64;
            let successes = outs.iter().filter(|o| o.success).count() as f64;
            let delta_mean = outs.iter().map(|o| o.delta).sum::<f64>() / count;
            let delta_var = outs
                .iter()
                .map(|o| (o.delta - delta_mean) * (o.delta - delta_mean))
                .sum::<f64>()
                / count;
            rows.push(SweepRow {
                rho,
                solver,
                s: successes / count,
                delta_mean,
                delta_std: delta_var.sqrt(),
                k_mean: outs.iter().map(|o| o.steps as f64).sum::<f64>() / count,
                time_mean_s: outs.iter().map(|o| o.time_s).sum::<f64>() / count,
                seed: config.seed,
            });
        }
    }
    rows
}

/// Quality of the undecimated guidance vector as a predictor of the support.
#[derive(Debug, Clone, PartialEq)]
pub struct CueStats {
    pub rho: f64,
    /// `f(n)` for `n = 1..=N`: mean fraction of true non-zeros among the `n`
    /// indices with largest `|g_i|`.
    pub rank_curve: Vec<f64>,
    /// Fraction of samples whose leading index lies in the support.
    pub p1: f64,
    pub samples: usize,
    pub nonzeros: usize,
}

impl CueStats {
    /// Random-pick baseline.
    pub fn baseline(&self) -> f64 {
        self.rho
    }
}

/// For each sparsity, draws `samples` planted signals on one Gaussian
/// `round(alpha·N) × N` matrix, computes `g = D⁺ z` and ranks `|g_i|`.
pub fn cue_experiment(
    n: usize,
    alpha: f64,
    rho_list: &[f64],
    kind: SignalKind,
    samples: usize,
    seed: u64,
) -> Result<Vec<CueStats>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let m = support_size(n, alpha);
    let d = gen_gaussian_matrix(m, n, derive_seed(seed, "cue-matrix", &[]))?;
    let chol = PivotedCholesky::new(d.gram_rows().as_slice(), m)?;
    if chol.rank() < m {
        return Err(Error::RankDeficient {
            rank: chol.rank(),
            dim: m,
        });
    }

    let mut out = Vec::with_capacity(rho_list.len());
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for (r, &rho) in rho_list.iter().enumerate() {
        let mut hits_at = vec![0u64; n];
        let mut leading_hits = 0usize;
        let mut nonzeros = 0;
        for sample in 0..samples {
            let signal = gen_planted_signal(
                n,
                rho,
                kind,
                derive_seed(seed, "cue-signal", &[r as u64, sample as u64]),
            )?;
            nonzeros = signal.nonzeros();
            let g = guidance_vector(&d, &chol, &signal)?;
            order.clear();
            order.extend(0..n);
            // stable: ties keep the lower index first
            order.sort_by(|&a, &b| g[b].abs().total_cmp(&g[a].abs()));
            let mut in_support = vec![false; n];
            for &i in &signal.support {
                in_support[i] = true;
            }
            if in_support[order[0]] {
                leading_hits += 1;
            }
            let mut running = 0u64;
            for (k, &i) in order.iter().enumerate() {
                running += in_support[i] as u64;
                hits_at[k] += running;
            }
        }
        let rank_curve = hits_at
            .iter()
            .enumerate()
            .map(|(k, &h)| h as f64 / ((k as u64 + 1) * samples as u64) as f64)
            .collect();
        out.push(CueStats {
            rho,
            rank_curve,
            p1: leading_hits as f64 / samples as f64,
            samples,
            nonzeros,
        });
    }
    Ok(out)
}

fn guidance_vector(
    d: &DenseMatrix,
    chol: &PivotedCholesky,
    signal: &PlantedSignal,
) -> Result<Vec<f64>> {
    let z = mat_vec(d, &signal.h0)?;
    Ok(crate::linalg::min_norm_from_gram(d, chol, &z))
}

/// Runs `solve` and returns its per-step trace.
pub fn residual_trace(instance: &ProblemInstance, params: &SolverParams) -> Result<SolverTrace> {
    Ok(solve(&instance.matrix, &instance.measurement, params)?.trace)
}
