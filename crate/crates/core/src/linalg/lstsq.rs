//! Minimum-norm least-squares solutions of consistent underdetermined systems.
//!
//! Two independent routes are provided:
//!
//! * [`least_squares_min_norm`] runs dual ascent on the Lagrangian
//!   `½‖g‖² + βᵀ(z − Dg)`, i.e. `g = Dᵀβ`, `β ← β + ε (z − Dg)`, with the step
//!   `ε = ⟨γ,η⟩/⟨η,η⟩` that minimizes the next gap `γ − εη`, where `γ = z − Dg`
//!   and `η = D Dᵀ γ`.
//! * [`least_squares_direct`] factors the Gram matrix `D Dᵀ = L Lᵀ` (the lower
//!   factor of the LQ decomposition of `D`) and returns `g = Dᵀ (D Dᵀ)⁻¹ z`.

use super::matrix::{axpy, dot, norm2, DenseMatrix};
use crate::error::{check_len, Error, Result};

/// Relative pivot / singular value cutoff below which a direction is treated as null.
pub const RANK_TOL: f64 = 1e-12;

/// Recompute the gap from scratch every this many dual-ascent iterations.
const GAP_REFRESH: usize = 50;

/// A real linear map `x ↦ D x` together with its adjoint.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `out = D x`; `out.len() == nrows()`.
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// `out = Dᵀ y`; `out.len() == ncols()`.
    fn apply_transpose(&self, y: &[f64], out: &mut [f64]);
}

impl LinearOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), out);
            }
        }
    }
}

/// Stopping rule and optional warm start for dual ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresParams {
    /// Converged once `‖Dg − z‖₂ ≤ tol · max(‖z‖₂, 1)`.
    pub tol: f64,
    pub max_iters: usize,
    /// Initial multipliers β; zero when absent.
    pub warm_start: Option<Vec<f64>>,
}

impl Default for LeastSquaresParams {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 10_000,
            warm_start: None,
        }
    }
}

impl LeastSquaresParams {
    pub fn validate(&self, rows: usize) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "least-squares tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument(
                "least-squares max_iters must be at least 1".into(),
            ));
        }
        if let Some(w) = &self.warm_start {
            check_len("warm_start", rows, w.len())?;
        }
        Ok(())
    }
}

/// Output of [`least_squares_min_norm`].
#[derive(Debug, Clone, PartialEq)]
pub struct MinNormSolution {
    /// Minimum-norm solution, `g = Dᵀβ`.
    pub g: Vec<f64>,
    /// Final Lagrange multipliers, reusable as a warm start.
    pub beta: Vec<f64>,
    /// Number of β updates performed.
    pub iters: usize,
}

/// Step size minimizing `‖γ − εη‖₂`.
pub fn optimal_step(gamma: &[f64], eta: &[f64]) -> Result<f64> {
    check_len("optimal_step", gamma.len(), eta.len())?;
    let ee = dot(eta, eta);
    if ee == 0.0 {
        return if dot(gamma, gamma) > 0.0 {
            Err(Error::InconsistentSystem)
        } else {
            Ok(0.0)
        };
    }
    Ok(dot(gamma, eta) / ee)
}

/// Minimum-ℓ₂-norm solution of `D g = z` by dual ascent with the optimal step.
pub fn least_squares_min_norm(
    d: &DenseMatrix,
    z: &[f64],
    params: &LeastSquaresParams,
) -> Result<MinNormSolution> {
    dual_ascent(d, z, params)
}

/// [`least_squares_min_norm`] over any [`LinearOperator`].
pub fn dual_ascent<Op: LinearOperator + ?Sized>(
    op: &Op,
    z: &[f64],
    params: &LeastSquaresParams,
) -> Result<MinNormSolution> {
    let (m, n) = (op.nrows(), op.ncols());
    check_len("least_squares_min_norm", m, z.len())?;
    params.validate(m)?;

    let z_norm = norm2(z);
    if z_norm == 0.0 {
        return Ok(MinNormSolution {
            g: vec![0.0; n],
            beta: vec![0.0; m],
            iters: 0,
        });
    }
    let target = params.tol * z_norm.max(1.0);

    let mut beta = params.warm_start.clone().unwrap_or_else(|| vec![0.0; m]);
    let mut u = vec![0.0; n];
    let mut eta = vec![0.0; m];
    let mut gamma = vec![0.0; m];

    let refresh_gap = |beta: &[f64], u: &mut [f64], gamma: &mut [f64], scratch: &mut [f64]| {
        op.apply_transpose(beta, u);
        op.apply(u, scratch);
        for ((g, zi), s) in gamma.iter_mut().zip(z).zip(scratch.iter()) {
            *g = zi - s;
        }
    };
    refresh_gap(&beta, &mut u, &mut gamma, &mut eta);

    let mut iters = 0;
    let mut gap = norm2(&gamma);
    while gap > target && iters < params.max_iters {
        op.apply_transpose(&gamma, &mut u);
        op.apply(&u, &mut eta);
        let eps = optimal_step(&gamma, &eta)?;
        axpy(eps, &gamma, &mut beta);
        axpy(-eps, &eta, &mut gamma);
        iters += 1;
        gap = norm2(&gamma);
        // the recurrence drifts from z − D Dᵀ β; confirm convergence on the true gap
        if iters % GAP_REFRESH == 0 || gap <= target {
            refresh_gap(&beta, &mut u, &mut gamma, &mut eta);
            gap = norm2(&gamma);
        }
    }

    // Final check against the true residual, not the running gap.
    let mut g = vec![0.0; n];
    op.apply_transpose(&beta, &mut g);
    op.apply(&g, &mut eta);
    let residual = z
        .iter()
        .zip(&eta)
        .map(|(zi, e)| (zi - e) * (zi - e))
        .sum::<f64>()
        .sqrt();
    if residual > target {
        return Err(Error::NonConvergence {
            iters,
            residual: residual / z_norm.max(1.0),
        });
    }
    Ok(MinNormSolution { g, beta, iters })
}

/// Cholesky factorization with diagonal pivoting of a symmetric positive
/// semidefinite matrix, truncated at the numerical rank.
///
/// `P A Pᵀ ≈ L Lᵀ` where `L` is `n × rank`; pivots below
/// `RANK_TOL × (largest pivot)` end the factorization.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    n: usize,
    rank: usize,
    /// Row-major `n × n` storage; the leading `rank` columns of the lower triangle hold `L`.
    factor: Vec<f64>,
    /// `perm[k]` is the original index placed at position `k`.
    perm: Vec<usize>,
}

impl PivotedCholesky {
    /// Factors the `n × n` symmetric matrix stored row-major in `a`.
    pub fn new(a: &[f64], n: usize) -> Result<Self> {
        check_len("PivotedCholesky::new", n * n, a.len())?;
        let mut f = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut first_pivot = 0.0;
        let mut rank = n;
        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, f[i * n + i]))
                    .fold((k, f64::NEG_INFINITY), |best, cur| {
                        if cur.1 > best.1 {
                            cur
                        } else {
                            best
                        }
                    });
            if k == 0 {
                first_pivot = pivot;
            }
            if !(pivot > RANK_TOL * first_pivot) || pivot <= 0.0 {
                rank = k;
                break;
            }
            if p != k {
                swap_symmetric(&mut f, n, k, p);
                perm.swap(k, p);
            }
            let lkk = pivot.sqrt();
            f[k * n + k] = lkk;
            for i in k + 1..n {
                f[i * n + k] /= lkk;
            }
            // Mirror column k into row k so the trailing update runs along contiguous rows.
            let tail: Vec<f64> = (k + 1..n).map(|j| f[j * n + k]).collect();
            f[k * n + k + 1..(k + 1) * n].copy_from_slice(&tail);
            for i in k + 1..n {
                let lik = f[i * n + k];
                if lik != 0.0 {
                    axpy(-lik, &tail, &mut f[i * n + k + 1..(i + 1) * n]);
                }
            }
        }
        Ok(Self {
            n,
            rank,
            factor: f,
            perm,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` on the leading pivot block; the remaining entries of
    /// `x` are zero. Exact when `b` lies in the range of `A`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, r) = (self.n, self.rank);
        debug_assert_eq!(b.len(), n);
        let f = &self.factor;
        let mut w: Vec<f64> = self.perm[..r].iter().map(|&p| b[p]).collect();
        for i in 0..r {
            let mut s = w[i];
            for j in 0..i {
                s -= f[i * n + j] * w[j];
            }
            w[i] = s / f[i * n + i];
        }
        for i in (0..r).rev() {
            let mut s = w[i];
            for j in i + 1..r {
                s -= f[j * n + i] * w[j];
            }
            w[i] = s / f[i * n + i];
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm[..r].iter().enumerate() {
            x[p] = w[k];
        }
        x
    }
}

fn swap_symmetric(f: &mut [f64], n: usize, a: usize, b: usize) {
    // Rows then columns; the lower-left block of already factored columns moves with the rows.
    for j in 0..n {
        f.swap(a * n + j, b * n + j);
    }
    for i in 0..n {
        f.swap(i * n + a, i * n + b);
    }
}

/// Minimum-norm solution `g = Dᵀ(D Dᵀ)⁻¹ z` via a Cholesky factorization of
/// the Gram matrix. Fails with [`Error::RankDeficient`] when `D` does not have
/// full row rank; use [`least_squares_truncated`] in that case.
pub fn least_squares_direct(d: &DenseMatrix, z: &[f64]) -> Result<Vec<f64>> {
    check_len("least_squares_direct", d.rows(), z.len())?;
    let chol = PivotedCholesky::new(d.gram_rows().as_slice(), d.rows())?;
    if chol.rank() < d.rows() {
        return Err(Error::RankDeficient {
            rank: chol.rank(),
            dim: d.rows(),
        });
    }
    Ok(gram_solve(d, &chol, z))
}

/// Pseudo-inverse solution `g = D⁺ z` that drops numerically null directions
/// of `D Dᵀ` instead of failing on rank deficiency.
pub fn least_squares_truncated(d: &DenseMatrix, z: &[f64]) -> Result<Vec<f64>> {
    check_len("least_squares_truncated", d.rows(), z.len())?;
    let chol = PivotedCholesky::new(d.gram_rows().as_slice(), d.rows())?;
    Ok(gram_solve(d, &chol, z))
}

fn gram_solve<Op: LinearOperator + ?Sized>(op: &Op, chol: &PivotedCholesky, z: &[f64]) -> Vec<f64> {
    let beta = chol.solve(z);
    let mut g = vec![0.0; op.ncols()];
    op.apply_transpose(&beta, &mut g);
    g
}

/// `g = Dᵀ β` with `β` from an existing Gram factorization of `op`.
pub fn min_norm_from_gram<Op: LinearOperator + ?Sized>(
    op: &Op,
    chol: &PivotedCholesky,
    z: &[f64],
) -> Vec<f64> {
    gram_solve(op, chol, z)
}
