//! Sparse recovery for underdetermined linear systems `D h = z`.
//!
//! The central algorithm is shortest-solution guided decimation (SSD): at
//! every step the minimum-norm solution of the current system picks the
//! column to eliminate, the remaining columns and the residual are projected
//! orthogonally to it, and the eliminated unknowns are recovered at the end by
//! back-substitution. Orthogonal matching pursuit and orthogonal least squares
//! share the same decimation loop and differ only in the guidance vector.
//!
//! Modules:
//! * [`linalg`]: dense kernels, dual-ascent and direct minimum-norm solvers,
//!   condition numbers.
//! * [`solvers`]: the decimation/backtrack loop with SSD, OMP and OLS guidance.
//! * [`problems`]: seeded matrix and planted-signal ensembles, recovery metrics.
//! * [`harness`]: trials, sparsity sweeps, guidance-cue statistics, traces.
//! * [`io`]: text formats for matrices, vectors, configs and result tables.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use harness::{CueStats, MatrixSpec, SweepConfig, SweepResult, SweepRow, TrialOutcome};
pub use linalg::{DenseMatrix, LeastSquaresParams};
pub use problems::{PlantedSignal, ProblemInstance, SignalKind};
pub use solvers::{GuidanceEngine, Method, SolveResult, SolverParams, SolverTrace, TraceStep};
