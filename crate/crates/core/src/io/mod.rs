//! Text file formats.
//!
//! Matrices:
//! ```text
//! # optional provenance comment lines
//! CSMAT 1 <rows> <cols>
//! <cols space-separated values>      (rows lines)
//! ```
//! Vectors use the header `CSVEC 1 <len>` followed by one value per line.
//! Values are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite `f64` exactly. Files are UTF-8 with LF endings.

mod config;
mod tables;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::linalg::DenseMatrix;

pub use config::{parse_config, read_config_file, serialize_config};
pub use tables::{
    read_cue_csv, read_sweep_csv, read_trace_csv, write_cue_csv, write_sweep_csv, write_trace_csv,
    CUE_HEADER, SWEEP_HEADER, TRACE_HEADER,
};

pub const MATRIX_MAGIC: &str = "CSMAT";
pub const VECTOR_MAGIC: &str = "CSVEC";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed file: {message}")]
    MalformedFile { line: usize, message: String },
    #[error("line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: non-finite or unparsable value '{text}'")]
    NonFiniteValue {
        line: usize,
        column: usize,
        text: String,
    },
    #[error("line {line}: schema mismatch: {message}")]
    SchemaMismatch { line: usize, message: String },
    #[error("line {line}: invalid value: {message}")]
    Validation { line: usize, message: String },
    #[error("config key '{key}': {message}")]
    Config { key: String, message: String },
}

pub type FormatResult<T> = std::result::Result<T, FormatError>;

/// 17 significant digits in scientific notation.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses one numeric field, rejecting NaN, infinities and garbage.
pub fn parse_f64(text: &str, line: usize, column: usize) -> FormatResult<f64> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(FormatError::NonFiniteValue {
            line,
            column,
            text: text.to_string(),
        }),
    }
}

/// A text file split into its leading `#` comment block and the remaining lines.
struct Document {
    comments: Vec<String>,
    /// (1-based line number, content)
    body: Vec<(usize, String)>,
}

fn read_document<R: BufRead>(reader: R) -> FormatResult<Document> {
    let mut comments = Vec::new();
    let mut body = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line).to_string();
        if body.is_empty() && line.starts_with('#') {
            comments.push(line[1..].trim_start().to_string());
        } else if body.is_empty() && line.trim().is_empty() {
            continue;
        } else {
            body.push((idx + 1, line));
        }
    }
    // trailing blank lines are tolerated
    while body.last().is_some_and(|(_, l)| l.trim().is_empty()) {
        body.pop();
    }
    Ok(Document { comments, body })
}

fn write_comments<W: Write>(w: &mut W, comments: &[String]) -> std::io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    Ok(())
}

fn parse_header(doc: &Document, magic: &str, dims: usize) -> FormatResult<(usize, Vec<usize>)> {
    let (line_no, header) = doc.body.first().ok_or(FormatError::MalformedFile {
        line: doc.comments.len() + 1,
        message: format!("missing {magic} header"),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let malformed = |message: String| FormatError::MalformedFile {
        line: *line_no,
        message,
    };
    if fields.len() != 2 + dims || fields[0] != magic {
        return Err(malformed(format!(
            "expected header '{magic} {FORMAT_VERSION}' with {dims} dimension(s), got '{header}'"
        )));
    }
    if fields[1] != FORMAT_VERSION.to_string() {
        return Err(malformed(format!(
            "unsupported format version '{}'",
            fields[1]
        )));
    }
    let mut out = Vec::with_capacity(dims);
    for f in &fields[2..] {
        let v: usize = f
            .parse()
            .map_err(|_| malformed(format!("invalid dimension '{f}'")))?;
        if v == 0 {
            return Err(malformed("dimensions must be positive".into()));
        }
        out.push(v);
    }
    Ok((*line_no, out))
}

pub fn write_matrix<W: Write>(
    w: &mut W,
    m: &DenseMatrix,
    comments: &[String],
) -> std::io::Result<()> {
    write_comments(w, comments)?;
    writeln!(
        w,
        "{MATRIX_MAGIC} {FORMAT_VERSION} {} {}",
        m.rows(),
        m.cols()
    )?;
    let mut line = String::new();
    for i in 0..m.rows() {
        line.clear();
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format_f64(*v));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Reads a matrix file, returning the matrix and its comment lines.
pub fn read_matrix<R: BufRead>(reader: R) -> FormatResult<(DenseMatrix, Vec<String>)> {
    let doc = read_document(reader)?;
    let (header_line, dims) = parse_header(&doc, MATRIX_MAGIC, 2)?;
    let (rows, cols) = (dims[0], dims[1]);
    let data_lines = &doc.body[1..];
    if data_lines.len() != rows {
        return Err(FormatError::MalformedFile {
            line: data_lines.last().map_or(header_line, |(l, _)| *l),
            message: format!("header declares {rows} rows, found {}", data_lines.len()),
        });
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (line_no, text) in data_lines {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != cols {
            return Err(FormatError::DimensionMismatch {
                line: *line_no,
                expected: cols,
                found: fields.len(),
            });
        }
        for (c, f) in fields.iter().enumerate() {
            data.push(parse_f64(f, *line_no, c + 1)?);
        }
    }
    let m = DenseMatrix::new(rows, cols, data).map_err(|e| FormatError::MalformedFile {
        line: header_line,
        message: e.to_string(),
    })?;
    Ok((m, doc.comments))
}

pub fn write_vector<W: Write>(w: &mut W, v: &[f64], comments: &[String]) -> std::io::Result<()> {
    write_comments(w, comments)?;
    writeln!(w, "{VECTOR_MAGIC} {FORMAT_VERSION} {}", v.len())?;
    for x in v {
        writeln!(w, "{}", format_f64(*x))?;
    }
    Ok(())
}

pub fn read_vector<R: BufRead>(reader: R) -> FormatResult<(Vec<f64>, Vec<String>)> {
    let doc = read_document(reader)?;
    let (header_line, dims) = parse_header(&doc, VECTOR_MAGIC, 1)?;
    let len = dims[0];
    let data_lines = &doc.body[1..];
    if data_lines.len() != len {
        return Err(FormatError::MalformedFile {
            line: data_lines.last().map_or(header_line, |(l, _)| *l),
            message: format!("header declares {len} values, found {}", data_lines.len()),
        });
    }
    let mut out = Vec::with_capacity(len);
    for (line_no, text) in data_lines {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 1 {
            return Err(FormatError::DimensionMismatch {
                line: *line_no,
                expected: 1,
                found: fields.len(),
            });
        }
        out.push(parse_f64(fields[0], *line_no, 1)?);
    }
    Ok((out, doc.comments))
}

pub fn write_matrix_file(path: &Path, m: &DenseMatrix, comments: &[String]) -> FormatResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix(&mut w, m, comments)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix_file(path: &Path) -> FormatResult<(DenseMatrix, Vec<String>)> {
    read_matrix(BufReader::new(File::open(path)?))
}

pub fn write_vector_file(path: &Path, v: &[f64], comments: &[String]) -> FormatResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vector(&mut w, v, comments)?;
    w.flush()?;
    Ok(())
}

pub fn read_vector_file(path: &Path) -> FormatResult<(Vec<f64>, Vec<String>)> {
    read_vector(BufReader::new(File::open(path)?))
}

/// Looks up `key=value` in provenance comment lines.
pub fn comment_value<'a>(comments: &'a [String], key: &str) -> Option<&'a str> {
    comments.iter().find_map(|c| {
        let (k, v) = c.split_once('=')?;
        (k.trim() == key).then(|| v.trim())
    })
}
