//! Sampling-matrix and planted-signal ensembles, measurements and recovery metrics.

pub mod rng;

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{check_len, Error, Result};
use crate::linalg::{mat_vec, norm2, DenseMatrix};
use rng::substream;

/// Recovery is declared successful when `Δ ≤ SUCCESS_THRESHOLD`.
pub const SUCCESS_THRESHOLD: f64 = 1e-5;

/// Distribution of the non-zero entries of a planted signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalKind {
    /// Standard normal.
    Gaussian,
    /// Uniform on the open interval (−1, 1).
    Uniform,
}

impl SignalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SignalKind::Gaussian => "gaussian",
            SignalKind::Uniform => "uniform",
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(SignalKind::Gaussian),
            "uniform" => Ok(SignalKind::Uniform),
            other => Err(Error::InvalidArgument(format!(
                "unknown signal kind '{other}'"
            ))),
        }
    }
}

/// Sparse ground truth `h⁰`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSignal {
    pub h0: Vec<f64>,
    /// Sorted positions of the non-zero entries.
    pub support: Vec<usize>,
    pub rho: f64,
    pub kind: SignalKind,
}

impl PlantedSignal {
    pub fn len(&self) -> usize {
        self.h0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h0.is_empty()
    }

    pub fn nonzeros(&self) -> usize {
        self.support.len()
    }

    /// Root-mean-square of the non-zero entries.
    pub fn rms_amplitude(&self) -> f64 {
        let sq: f64 = self.support.iter().map(|&i| self.h0[i] * self.h0[i]).sum();
        (sq / self.support.len() as f64).sqrt()
    }
}

/// Where an instance came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub generator: String,
    pub rows: usize,
    pub cols: usize,
    pub rank: Option<usize>,
    pub matrix_seed: Option<u64>,
    pub signal_seed: Option<u64>,
}

impl Provenance {
    /// `key=value` pairs suitable for `#` comment lines in the text formats.
    pub fn to_comment_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("generator={}", self.generator),
            format!("rows={}", self.rows),
            format!("cols={}", self.cols),
        ];
        if let Some(r) = self.rank {
            lines.push(format!("rank={r}"));
        }
        if let Some(s) = self.matrix_seed {
            lines.push(format!("matrix_seed={s}"));
        }
        if let Some(s) = self.signal_seed {
            lines.push(format!("signal_seed={s}"));
        }
        lines
    }
}

/// Matrix, planted signal and the measurement `z = D h⁰`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub matrix: DenseMatrix,
    pub signal: PlantedSignal,
    pub measurement: Vec<f64>,
    pub provenance: Provenance,
    pub q: Option<f64>,
}

impl ProblemInstance {
    pub fn new(matrix: DenseMatrix, signal: PlantedSignal, provenance: Provenance) -> Result<Self> {
        if matrix.rows() >= matrix.cols() {
            return Err(Error::InvalidArgument(format!(
                "compression ratio M/N must be below 1 (got {}x{})",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let measurement = measure(&matrix, &signal)?;
        Ok(Self {
            matrix,
            signal,
            measurement,
            provenance,
            q: None,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.matrix.rows() as f64 / self.matrix.cols() as f64
    }
}

fn gaussian_entries<R: Rng>(rng: &mut R, count: usize) -> Vec<f64> {
    (0..count).map(|_| StandardNormal.sample(rng)).collect()
}

/// `M × N` matrix with i.i.d. standard normal entries.
pub fn gen_gaussian_matrix(m: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "matrix dimensions must be positive".into(),
        ));
    }
    let mut rng = substream(seed, "gaussian-matrix", &[m as u64, n as u64]);
    DenseMatrix::new(m, n, gaussian_entries(&mut rng, m * n))
}

/// Product `D₁ D₂` of independent Gaussian `M × R` and `R × N` factors.
pub fn gen_correlated_matrix(m: usize, r: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
    if m == 0 || r == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "matrix dimensions must be positive".into(),
        ));
    }
    let dims = [m as u64, r as u64, n as u64];
    let mut left = substream(seed, "correlated-left", &dims);
    let mut right = substream(seed, "correlated-right", &dims);
    let d1 = DenseMatrix::new(m, r, gaussian_entries(&mut left, m * r))?;
    let d2 = DenseMatrix::new(r, n, gaussian_entries(&mut right, r * n))?;
    d1.matmul(&d2)
}

/// Number of non-zeros `round(ρN)`, rounding halves up.
pub fn support_size(n: usize, rho: f64) -> usize {
    (rho * n as f64 + 0.5).floor() as usize
}

/// Sparse signal with `round(ρN)` non-zeros at uniformly random positions.
pub fn gen_planted_signal(
    n: usize,
    rho: f64,
    kind: SignalKind,
    seed: u64,
) -> Result<PlantedSignal> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sparsity must lie in (0, 1], got {rho}"
        )));
    }
    let count = support_size(n, rho);
    if count == 0 {
        return Err(Error::InvalidArgument(format!(
            "sparsity {rho} leaves no non-zero entries at N = {n}"
        )));
    }
    let count = count.min(n);
    let mut rng = substream(seed, "planted-signal", &[n as u64]);
    let mut support = sample(&mut rng, n, count).into_vec();
    support.sort_unstable();

    let uniform = Uniform::new(-1.0, 1.0).expect("valid range");
    let mut h0 = vec![0.0; n];
    for &i in &support {
        h0[i] = loop {
            let v: f64 = match kind {
                SignalKind::Gaussian => StandardNormal.sample(&mut rng),
                SignalKind::Uniform => uniform.sample(&mut rng),
            };
            // a zero would silently shrink the support; -1 is outside the open interval
            if v != 0.0 && (kind == SignalKind::Gaussian || v.abs() < 1.0) {
                break v;
            }
        };
    }
    Ok(PlantedSignal {
        h0,
        support,
        rho,
        kind,
    })
}

/// `z = D h⁰`.
pub fn measure(d: &DenseMatrix, signal: &PlantedSignal) -> Result<Vec<f64>> {
    mat_vec(d, &signal.h0)
}

/// `Δ = ‖h − h⁰‖₂ / ‖h⁰‖₂`.
pub fn relative_distance(h: &[f64], h0: &[f64]) -> Result<f64> {
    check_len("relative_distance", h0.len(), h.len())?;
    let denom = norm2(h0);
    if denom == 0.0 {
        return Err(Error::InvalidArgument(
            "relative distance to a zero reference vector".into(),
        ));
    }
    let diff: Vec<f64> = h.iter().zip(h0).map(|(a, b)| a - b).collect();
    Ok(norm2(&diff) / denom)
}

pub fn is_success(delta: f64) -> bool {
    delta <= SUCCESS_THRESHOLD
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    #[test]
    fn gaussian_matrix_deterministic() {
        let a = gen_gaussian_matrix(4, 8, 7).unwrap();
        let b = gen_gaussian_matrix(4, 8, 7).unwrap();
        let c = gen_gaussian_matrix(4, 8, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_matrix_moments() {
        let d = gen_gaussian_matrix(200, 1000, 3).unwrap();
        let v = d.as_slice();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() <= 0.02, "mean {mean}");
        assert!((var - 1.0).abs() <= 0.02, "var {var}");
    }

    #[test]
    fn planted_signal_counts_and_ranges() {
        let s = gen_planted_signal(1000, 0.05, SignalKind::Gaussian, 1).unwrap();
        assert_eq!(s.nonzeros(), 50);
        assert_eq!(s.h0.iter().filter(|v| **v != 0.0).count(), 50);
        assert!(s.support.windows(2).all(|w| w[0] < w[1]));

        let s = gen_planted_signal(500, 0.2, SignalKind::Uniform, 2).unwrap();
        assert_eq!(s.nonzeros(), 100);
        assert!(s
            .support
            .iter()
            .all(|&i| s.h0[i] != 0.0 && s.h0[i].abs() < 1.0));

        let s = gen_planted_signal(37, 1.0, SignalKind::Uniform, 3).unwrap();
        assert!(s.h0.iter().all(|v| *v != 0.0));
    }

    #[test]
    fn planted_signal_rejects_empty_support() {
        assert!(gen_planted_signal(10, 0.01, SignalKind::Gaussian, 0).is_err());
        assert!(gen_planted_signal(10, 0.0, SignalKind::Gaussian, 0).is_err());
        assert!(gen_planted_signal(10, 1.5, SignalKind::Gaussian, 0).is_err());
    }

    #[test]
    fn support_rounding_half_up() {
        assert_eq!(support_size(10, 0.05), 1);
        assert_eq!(support_size(10, 0.04), 0);
        assert_eq!(support_size(1000, 0.078), 78);
    }

    #[test]
    fn measure_examples() {
        let d = gen_gaussian_matrix(5, 12, 9).unwrap();
        let zero = PlantedSignal {
            h0: vec![0.0; 12],
            support: vec![],
            rho: 0.0,
            kind: SignalKind::Gaussian,
        };
        assert_eq!(measure(&d, &zero).unwrap(), vec![0.0; 5]);
        let mut unit = zero.clone();
        unit.h0[4] = 1.0;
        assert_eq!(measure(&d, &unit).unwrap(), d.column(4));

        let s = gen_planted_signal(12, 0.25, SignalKind::Uniform, 4).unwrap();
        let z = measure(&d, &s).unwrap();
        for (i, zi) in z.iter().enumerate() {
            assert!((zi - dot(d.row(i), &s.h0)).abs() <= 1e-15);
        }
    }

    #[test]
    fn relative_distance_examples() {
        let h0 = [1.0, -2.0, 0.0, 0.5];
        assert_eq!(relative_distance(&h0, &h0).unwrap(), 0.0);
        assert_eq!(relative_distance(&[0.0; 4], &h0).unwrap(), 1.0);
        let twice: Vec<f64> = h0.iter().map(|v| 2.0 * v).collect();
        assert_eq!(relative_distance(&twice, &h0).unwrap(), 1.0);
        assert!(relative_distance(&h0, &[0.0; 4]).is_err());
    }

    #[test]
    fn success_threshold_inclusive() {
        assert!(is_success(0.0));
        assert!(is_success(1e-5));
        assert!(!is_success(1e-4));
    }

    #[test]
    fn instance_measurement_consistent() {
        let d = gen_correlated_matrix(6, 4, 20, 11).unwrap();
        let s = gen_planted_signal(20, 0.1, SignalKind::Gaussian, 12).unwrap();
        let prov = Provenance {
            generator: "correlated".into(),
            rows: 6,
            cols: 20,
            rank: Some(4),
            matrix_seed: Some(11),
            signal_seed: Some(12),
        };
        let inst = ProblemInstance::new(d.clone(), s.clone(), prov).unwrap();
        assert_eq!(inst.measurement, mat_vec(&d, &s.h0).unwrap());
        assert!((inst.alpha() - 0.3).abs() < 1e-15);
    }
}
