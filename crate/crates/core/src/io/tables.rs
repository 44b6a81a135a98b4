//! CSV result tables: sweep summaries, solver traces and cue statistics.

use std::io::{BufRead, Write};

use super::{format_f64, parse_f64, read_document, write_comments, FormatError, FormatResult};
use crate::harness::{CueStats, SweepRow};
use crate::solvers::{Method, SolverTrace, TraceStep};

pub const SWEEP_HEADER: &str = "rho,solver,s,delta_mean,delta_std,k_mean,time_mean_s,seed";
pub const TRACE_HEADER: &str = "step,lead_index,g_lead_abs,z_l1,z_l2,guidance_iters";
pub const CUE_HEADER: &str = "rho,n,f,p1,samples";

struct Table {
    comments: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

fn read_table<R: BufRead>(reader: R, header: &str) -> FormatResult<Table> {
    let doc = read_document(reader)?;
    let mut body = doc.body.into_iter();
    let (line, found) = body.next().ok_or(FormatError::SchemaMismatch {
        line: doc.comments.len() + 1,
        message: format!("missing header '{header}'"),
    })?;
    if found.trim() != header {
        return Err(FormatError::SchemaMismatch {
            line,
            message: format!("expected header '{header}', found '{found}'"),
        });
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (line, text) in body {
        let fields: Vec<String> = text.split(',').map(|f| f.trim().to_string()).collect();
        if fields.len() != width {
            return Err(FormatError::SchemaMismatch {
                line,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        rows.push((line, fields));
    }
    Ok(Table {
        comments: doc.comments,
        rows,
    })
}

fn parse_usize(text: &str, line: usize, column: usize) -> FormatResult<usize> {
    text.parse().map_err(|_| FormatError::Validation {
        line,
        message: format!("column {column}: expected a non-negative integer, found '{text}'"),
    })
}

fn parse_u64(text: &str, line: usize, column: usize) -> FormatResult<u64> {
    text.parse().map_err(|_| FormatError::Validation {
        line,
        message: format!("column {column}: expected an unsigned integer, found '{text}'"),
    })
}

fn check_unit_interval(v: f64, name: &str, line: usize) -> FormatResult<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(FormatError::Validation {
            line,
            message: format!("{name} = {v} outside [0, 1]"),
        })
    }
}

pub fn write_sweep_csv<W: Write>(
    w: &mut W,
    rows: &[SweepRow],
    comments: &[String],
) -> std::io::Result<()> {
    write_comments(w, comments)?;
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            format_f64(r.rho),
            r.solver,
            format_f64(r.s),
            format_f64(r.delta_mean),
            format_f64(r.delta_std),
            format_f64(r.k_mean),
            format_f64(r.time_mean_s),
            r.seed
        )?;
    }
    Ok(())
}

pub fn read_sweep_csv<R: BufRead>(reader: R) -> FormatResult<(Vec<SweepRow>, Vec<String>)> {
    let table = read_table(reader, SWEEP_HEADER)?;
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, f) in &table.rows {
        let line = *line;
        let solver: Method = f[1].parse().map_err(|_| FormatError::Validation {
            line,
            message: format!("unknown solver '{}'", f[1]),
        })?;
        out.push(SweepRow {
            rho: check_unit_interval(parse_f64(&f[0], line, 1)?, "rho", line)?,
            solver,
            s: check_unit_interval(parse_f64(&f[2], line, 3)?, "s", line)?,
            delta_mean: parse_f64(&f[3], line, 4)?,
            delta_std: parse_f64(&f[4], line, 5)?,
            k_mean: parse_f64(&f[5], line, 6)?,
            time_mean_s: parse_f64(&f[6], line, 7)?,
            seed: parse_u64(&f[7], line, 8)?,
        });
    }
    Ok((out, table.comments))
}

/// Writes the per-step trace; the row count `M` goes into a `rows=` comment.
pub fn write_trace_csv<W: Write>(
    w: &mut W,
    trace: &SolverTrace,
    comments: &[String],
) -> std::io::Result<()> {
    let mut all = vec![format!("rows={}", trace.rows)];
    all.extend(comments.iter().cloned());
    write_comments(w, &all)?;
    writeln!(w, "{TRACE_HEADER}")?;
    for (k, s) in trace.steps.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            k + 1,
            s.lead,
            format_f64(s.g_lead_abs),
            format_f64(s.z_l1),
            format_f64(s.z_l2),
            s.guidance_iters
        )?;
    }
    Ok(())
}

pub fn read_trace_csv<R: BufRead>(reader: R) -> FormatResult<(SolverTrace, Vec<String>)> {
    let table = read_table(reader, TRACE_HEADER)?;
    let rows = match super::comment_value(&table.comments, "rows") {
        Some(v) => v.parse().map_err(|_| FormatError::Validation {
            line: 1,
            message: format!("invalid rows comment '{v}'"),
        })?,
        None => 0,
    };
    let mut steps = Vec::with_capacity(table.rows.len());
    for (i, (line, f)) in table.rows.iter().enumerate() {
        let line = *line;
        let step = parse_usize(&f[0], line, 1)?;
        if step != i + 1 {
            return Err(FormatError::Validation {
                line,
                message: format!("expected step {}, found {step}", i + 1),
            });
        }
        steps.push(TraceStep {
            lead: parse_usize(&f[1], line, 2)?,
            g_lead_abs: parse_f64(&f[2], line, 3)?,
            z_l1: parse_f64(&f[3], line, 4)?,
            z_l2: parse_f64(&f[4], line, 5)?,
            guidance_iters: parse_usize(&f[5], line, 6)?,
        });
    }
    Ok((SolverTrace { rows, steps }, table.comments))
}

/// One row per (rho, n) pair; `p1` and `samples` repeat along each curve.
pub fn write_cue_csv<W: Write>(
    w: &mut W,
    stats: &[CueStats],
    comments: &[String],
) -> std::io::Result<()> {
    write_comments(w, comments)?;
    writeln!(w, "{CUE_HEADER}")?;
    for s in stats {
        for (k, f) in s.rank_curve.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                format_f64(s.rho),
                k + 1,
                format_f64(*f),
                format_f64(s.p1),
                s.samples
            )?;
        }
    }
    Ok(())
}

pub fn read_cue_csv<R: BufRead>(reader: R) -> FormatResult<(Vec<CueStats>, Vec<String>)> {
    let table = read_table(reader, CUE_HEADER)?;
    let mut out: Vec<CueStats> = Vec::new();
    for (line, f) in &table.rows {
        let line = *line;
        let rho = parse_f64(&f[0], line, 1)?;
        let n = parse_usize(&f[1], line, 2)?;
        let value = check_unit_interval(parse_f64(&f[2], line, 3)?, "f", line)?;
        let p1 = check_unit_interval(parse_f64(&f[3], line, 4)?, "p1", line)?;
        let samples = parse_usize(&f[4], line, 5)?;
        let continues = out
            .last()
            .is_some_and(|s| s.rho.to_bits() == rho.to_bits() && s.rank_curve.len() + 1 == n);
        if continues {
            out.last_mut().expect("checked").rank_curve.push(value);
        } else if n == 1 {
            out.push(CueStats {
                rho,
                rank_curve: vec![value],
                p1,
                samples,
                nonzeros: 0,
            });
        } else {
            return Err(FormatError::Validation {
                line,
                message: format!("rank curve for rho {rho} is not contiguous at n = {n}"),
            });
        }
    }
    for s in &mut out {
        s.nonzeros = (s.rank_curve.last().copied().unwrap_or(0.0) * s.rank_curve.len() as f64)
            .round() as usize;
    }
    Ok((out, table.comments))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(rho: f64, solver: Method, s: f64) -> SweepRow {
        SweepRow {
            rho,
            solver,
            s,
            delta_mean: 0.123456789012345,
            delta_std: 1e-17,
            k_mean: 41.5,
            time_mean_s: 0.0,
            seed: u64::MAX,
        }
    }

    #[test]
    fn empty_sweep_is_header_only() {
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &[], &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            format!("{SWEEP_HEADER}\n")
        );
        assert!(read_sweep_csv(buf.as_slice()).unwrap().0.is_empty());
    }

    #[test]
    fn sweep_row_round_trip() {
        let rows = vec![row(0.07, Method::Ssd, 0.62)];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows, &["seed=3".into()]).unwrap();
        let (back, comments) = read_sweep_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        assert_eq!(comments, vec!["seed=3".to_string()]);
    }

    #[test]
    fn sweep_rejects_bad_s_and_schema() {
        let text = format!("{SWEEP_HEADER}\n0.1,ssd,1.5,0,0,0,0,1\n");
        assert!(matches!(
            read_sweep_csv(text.as_bytes()),
            Err(FormatError::Validation { line: 2, .. })
        ));
        let text = "rho,solver,s\n0.1,ssd,1\n";
        assert!(matches!(
            read_sweep_csv(text.as_bytes()),
            Err(FormatError::SchemaMismatch { line: 1, .. })
        ));
        let text = format!("{SWEEP_HEADER}\n0.1,ssd,1,0\n");
        assert!(matches!(
            read_sweep_csv(text.as_bytes()),
            Err(FormatError::SchemaMismatch { line: 2, .. })
        ));
        let text = format!("{SWEEP_HEADER}\n0.1,amp,1,0,0,0,0,1\n");
        assert!(read_sweep_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn trace_round_trip() {
        let trace = SolverTrace {
            rows: 280,
            steps: vec![
                TraceStep {
                    lead: 17,
                    g_lead_abs: 2.5,
                    z_l1: 10.0 / 3.0,
                    z_l2: 1.25,
                    guidance_iters: 0,
                },
                TraceStep {
                    lead: 3,
                    g_lead_abs: 0.75,
                    z_l1: 1e-12,
                    z_l2: 1e-13,
                    guidance_iters: 12,
                },
            ],
        };
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace, &["solver=ssd".into()]).unwrap();
        let (back, comments) = read_trace_csv(buf.as_slice()).unwrap();
        assert_eq!(back, trace);
        assert_eq!(
            comments,
            vec!["rows=280".to_string(), "solver=ssd".to_string()]
        );
    }

    #[test]
    fn cue_round_trip() {
        let stats = vec![
            CueStats {
                rho: 0.5,
                rank_curve: vec![1.0, 0.5, 2.0 / 3.0, 0.5],
                p1: 0.9,
                samples: 10,
                nonzeros: 2,
            },
            CueStats {
                rho: 0.25,
                rank_curve: vec![0.0, 0.5, 1.0 / 3.0, 0.25],
                p1: 0.0,
                samples: 10,
                nonzeros: 1,
            },
        ];
        let mut buf = Vec::new();
        write_cue_csv(&mut buf, &stats, &[]).unwrap();
        let (back, _) = read_cue_csv(buf.as_slice()).unwrap();
        assert_eq!(back, stats);
    }
}
