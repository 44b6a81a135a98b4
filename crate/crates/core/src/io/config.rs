//! Sweep configuration files: flat `key = value` lines with `#` comments.
//!
//! `n` and `rho` are required; every other key falls back to the
//! [`SweepConfig::new`] default. Unknown or repeated keys are rejected.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{FormatError, FormatResult};
use crate::harness::{MatrixSpec, SweepConfig};
use crate::solvers::{GuidanceEngine, Method};

const KEYS: [&str; 16] = [
    "n",
    "alpha",
    "matrix",
    "rank",
    "matrix_file",
    "signal",
    "rho",
    "trials",
    "solvers",
    "seed",
    "fixed_matrix",
    "epsilon",
    "engine",
    "ls_tol",
    "ls_max_iters",
    "timing",
];

fn config_err(key: &str, message: impl Into<String>) -> FormatError {
    FormatError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> FormatResult<T> {
    value
        .parse()
        .map_err(|_| config_err(key, format!("cannot parse '{value}'")))
}

fn parse_finite(key: &str, value: &str) -> FormatResult<f64> {
    let v: f64 = parse_value(key, value)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(key, format!("non-finite value '{value}'")))
    }
}

fn parse_bool(key: &str, value: &str) -> FormatResult<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_err(
            key,
            format!("expected true or false, got '{value}'"),
        )),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> FormatResult<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

pub fn parse_config(text: &str) -> FormatResult<SweepConfig> {
    let mut seen = HashSet::new();
    let mut n = None;
    let mut rho = None;
    let mut cfg = SweepConfig::new(1, Vec::new());
    let mut matrix_kind = String::from("gaussian");
    let mut rank = None;
    let mut matrix_file = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(FormatError::MalformedFile {
            line: idx + 1,
            message: format!("expected 'key = value', found '{line}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(config_err(key, "unknown key"));
        }
        if !seen.insert(key.to_string()) {
            return Err(config_err(key, "given more than once"));
        }
        match key {
            "n" => n = Some(parse_value(key, value)?),
            "alpha" => cfg.alpha = parse_finite(key, value)?,
            "matrix" => matrix_kind = value.to_ascii_lowercase(),
            "rank" => rank = Some(parse_value::<usize>(key, value)?),
            "matrix_file" => matrix_file = Some(PathBuf::from(value)),
            "signal" => cfg.signal = parse_value(key, value)?,
            "rho" => {
                let grid: Vec<f64> = parse_list(key, value)?;
                if grid.iter().any(|r| !r.is_finite()) {
                    return Err(config_err(key, "non-finite entry"));
                }
                rho = Some(grid);
            }
            "trials" => cfg.trials = parse_value(key, value)?,
            "solvers" => cfg.solvers = parse_list::<Method>(key, value)?,
            "seed" => cfg.seed = parse_value(key, value)?,
            "fixed_matrix" => cfg.fixed_matrix = parse_bool(key, value)?,
            "epsilon" => cfg.epsilon = parse_finite(key, value)?,
            "engine" => cfg.engine = parse_value::<GuidanceEngine>(key, value)?,
            "ls_tol" => cfg.ls_tol = parse_finite(key, value)?,
            "ls_max_iters" => cfg.ls_max_iters = parse_value(key, value)?,
            "timing" => cfg.timing = parse_bool(key, value)?,
            _ => unreachable!("key list checked above"),
        }
    }

    cfg.n = n.ok_or_else(|| config_err("n", "required key missing"))?;
    cfg.rho_grid = rho.ok_or_else(|| config_err("rho", "required key missing"))?;
    cfg.matrix = match matrix_kind.as_str() {
        "gaussian" => MatrixSpec::Gaussian,
        "correlated" => MatrixSpec::Correlated {
            rank: rank.ok_or_else(|| config_err("rank", "required for matrix = correlated"))?,
        },
        "file" => MatrixSpec::File(
            matrix_file.ok_or_else(|| config_err("matrix_file", "required for matrix = file"))?,
        ),
        other => {
            return Err(config_err(
                "matrix",
                format!("unknown matrix kind '{other}'"),
            ))
        }
    };
    cfg.validate()
        .map_err(|e| config_err("config", e.to_string()))?;
    Ok(cfg)
}

pub fn read_config_file(path: &Path) -> FormatResult<SweepConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Inverse of [`parse_config`]; floats use the shortest exact representation.
pub fn serialize_config(cfg: &SweepConfig) -> String {
    let mut out = String::new();
    let mut push = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    push("n", cfg.n.to_string());
    push("alpha", format!("{:?}", cfg.alpha));
    match &cfg.matrix {
        MatrixSpec::Gaussian => push("matrix", "gaussian".into()),
        MatrixSpec::Correlated { rank } => {
            push("matrix", "correlated".into());
            push("rank", rank.to_string());
        }
        MatrixSpec::File(p) => {
            push("matrix", "file".into());
            push("matrix_file", p.display().to_string());
        }
    }
    push("signal", cfg.signal.to_string());
    let rho: Vec<String> = cfg.rho_grid.iter().map(|r| format!("{r:?}")).collect();
    push("rho", rho.join(", "));
    push("trials", cfg.trials.to_string());
    let solvers: Vec<&str> = cfg.solvers.iter().map(|m| m.as_str()).collect();
    push("solvers", solvers.join(", "));
    push("seed", cfg.seed.to_string());
    push("fixed_matrix", cfg.fixed_matrix.to_string());
    push("epsilon", format!("{:?}", cfg.epsilon));
    push("engine", cfg.engine.to_string());
    push("ls_tol", format!("{:?}", cfg.ls_tol));
    push("ls_max_iters", cfg.ls_max_iters.to_string());
    push("timing", cfg.timing.to_string());
    out
}
