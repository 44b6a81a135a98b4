//! Decimation with backtracking, driven by a pluggable guidance vector.
//!
//! Each step computes a guidance vector `g` over the active columns, picks the
//! leading index `l = argmax |g_μ|`, stores the equation
//! `h_l = ⟨z,dˡ⟩/⟨dˡ,dˡ⟩ − Σ_μ h_μ ⟨dᵘ,dˡ⟩/⟨dˡ,dˡ⟩`, and projects the other
//! active columns and the residual `z` orthogonally to `dˡ`. The loop stops
//! once `(1/M) Σ|z_i| ≤ ε`; the stored equations are then solved in reverse
//! order with every untouched unknown set to zero.

mod guidance;
mod state;

use std::fmt;
use std::str::FromStr;

pub use guidance::{
    guidance_ols, guidance_omp, guidance_ssd, guidance_ssd_direct, leading_index, Guidance,
};
pub use state::{
    backtrack, relative_overlap, DecimationState, EquationRecord, ZERO_COLUMN_ABS, ZERO_COLUMN_REL,
};

use crate::error::{check_len, Error, Result};
use crate::linalg::{check_finite, norm1, norm2, DenseMatrix, LeastSquaresParams};

/// Guidance strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Shortest-solution guided decimation: `g = D⁺ z`.
    Ssd,
    /// Orthogonal matching pursuit: `g = Dᵀ z`.
    Omp,
    /// Orthogonal least squares: `g_μ = ⟨z,dᵘ⟩ / ‖dᵘ‖`.
    Ols,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ssd, Method::Omp, Method::Ols];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ssd => "ssd",
            Method::Omp => "omp",
            Method::Ols => "ols",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ssd" => Ok(Method::Ssd),
            "omp" => Ok(Method::Omp),
            "ols" => Ok(Method::Ols),
            other => Err(Error::InvalidArgument(format!("unknown solver '{other}'"))),
        }
    }
}

/// How SSD computes its minimum-norm guidance vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuidanceEngine {
    /// Dual ascent with the optimal step, warm-started across steps.
    DualAscent,
    /// Pivoted Cholesky of the deflated Gram matrix `B Bᵀ`, updated in O(M²) per step.
    Direct,
}

impl GuidanceEngine {
    pub fn as_str(self) -> &'static str {
        match self {
            GuidanceEngine::DualAscent => "dual-ascent",
            GuidanceEngine::Direct => "direct",
        }
    }
}

impl fmt::Display for GuidanceEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GuidanceEngine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dual-ascent" | "dual_ascent" => Ok(GuidanceEngine::DualAscent),
            "direct" => Ok(GuidanceEngine::Direct),
            other => Err(Error::InvalidArgument(format!(
                "unknown guidance engine '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub method: Method,
    /// Stop once `(1/M) Σ|z_i| ≤ epsilon`.
    pub epsilon: f64,
    /// Step budget; `None` means `M`.
    pub max_steps: Option<usize>,
    /// Dual-ascent settings (SSD with [`GuidanceEngine::DualAscent`] only).
    pub ls_params: LeastSquaresParams,
    pub engine: GuidanceEngine,
}

impl SolverParams {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            epsilon: 1e-8,
            max_steps: None,
            ls_params: LeastSquaresParams::default(),
            engine: GuidanceEngine::Direct,
        }
    }

    pub fn with_engine(mut self, engine: GuidanceEngine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    fn validate(&self, rows: usize) -> Result<usize> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        let max_steps = self.max_steps.unwrap_or(rows);
        if max_steps > rows {
            return Err(Error::InvalidArgument(format!(
                "max_steps {max_steps} exceeds the number of rows {rows}"
            )));
        }
        if self.method == Method::Ssd && self.engine == GuidanceEngine::DualAscent {
            self.ls_params.validate(rows)?;
        }
        Ok(max_steps)
    }
}

/// Diagnostics for one decimation step; residual norms are taken after the deflation.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub lead: usize,
    pub g_lead_abs: f64,
    pub z_l1: f64,
    pub z_l2: f64,
    pub guidance_iters: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub rows: usize,
    pub steps: Vec<TraceStep>,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub h: Vec<f64>,
    /// Number of decimation steps `K`.
    pub steps: usize,
    /// Whether the stopping criterion holds for the final residual.
    pub converged: bool,
    /// `(1/M) Σ|z_i|` of the final residual.
    pub final_residual_l1: f64,
    pub trace: SolverTrace,
}

/// `true` when `(1/M) Σ|z_i| ≤ epsilon`.
pub fn stop_check(residual: &[f64], m: usize, epsilon: f64) -> bool {
    norm1(residual) / m as f64 <= epsilon
}

/// Runs the decimation loop followed by backtracking.
///
/// A complete `h` is returned even when the residual never drops below
/// `epsilon`; `converged` reports which case occurred.
pub fn solve(d: &DenseMatrix, z: &[f64], params: &SolverParams) -> Result<SolveResult> {
    check_len("solve", d.rows(), z.len())?;
    check_finite(z)?;
    let m = d.rows();
    let max_steps = params.validate(m)?;
    let mut state = DecimationState::new(d, z)?;
    let mut trace = SolverTrace {
        rows: m,
        steps: Vec::new(),
    };

    while !stop_check(state.residual(), m, params.epsilon)
        && state.step() < max_steps
        && !state.active().is_empty()
    {
        let g = match params.method {
            Method::Ssd => match params.engine {
                GuidanceEngine::DualAscent => guidance_ssd(&mut state, &params.ls_params)?,
                GuidanceEngine::Direct => guidance_ssd_direct(&mut state)?,
            },
            Method::Omp => guidance_omp(&state),
            Method::Ols => guidance_ols(&state),
        };
        let lead = leading_index(&g.values, state.active())?;
        let pos = state
            .active()
            .binary_search(&lead)
            .expect("leading index is active");
        let g_lead_abs = g.values[pos].abs();
        match state.deflate(lead) {
            Ok(()) => {}
            Err(Error::ZeroColumn(mu)) => {
                state.drop_column(mu)?;
                continue;
            }
            Err(e) => return Err(e),
        }
        state.prune_zero_columns();
        let r = state.residual();
        trace.steps.push(TraceStep {
            lead,
            g_lead_abs,
            z_l1: norm1(r),
            z_l2: norm2(r),
            guidance_iters: g.iters,
        });
    }

    let h = backtrack(state.stack(), d.cols())?;
    Ok(SolveResult {
        h,
        steps: state.step(),
        converged: stop_check(state.residual(), m, params.epsilon),
        final_residual_l1: norm1(state.residual()) / m as f64,
        trace,
    })
}
