//! Path input (CSV or raw binary) and coefficient CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Result, SigError};
use crate::sigcore::{PathBatch, WindowSpec};

/// Magic bytes opening a binary path file.
pub const BINARY_MAGIC: &[u8; 4] = b"SIGK";
const HEADER_LEN: usize = 16;

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| SigError::Parse(format!("cannot read {}: {e}", path.display())))
}

/// Reads a path batch; files starting with [`BINARY_MAGIC`] are decoded as binary.
pub fn read_paths(path: &Path, path_id_column: bool) -> Result<PathBatch> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(BINARY_MAGIC) {
        return parse_binary(&bytes);
    }
    let text = String::from_utf8(bytes).map_err(|_| {
        SigError::Parse(format!(
            "{} is neither UTF-8 CSV nor binary",
            path.display()
        ))
    })?;
    parse_csv(&text, path_id_column)
}

/// Binary layout: `"SIGK"`, then `B`, `M+1`, `d` as little-endian `u32`,
/// then `B*(M+1)*d` little-endian `f64` values.
pub fn parse_binary(bytes: &[u8]) -> Result<PathBatch> {
    if bytes.len() < HEADER_LEN || !bytes.starts_with(BINARY_MAGIC) {
        return Err(SigError::Parse("binary input has no valid header".into()));
    }
    let field = |i: usize| {
        let b: [u8; 4] = bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap();
        u32::from_le_bytes(b) as usize
    };
    let (batch, samples, d) = (field(0), field(1), field(2));
    let count = batch
        .checked_mul(samples)
        .and_then(|v| v.checked_mul(d))
        .ok_or_else(|| SigError::Capacity("binary header dimensions overflow".into()))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != count * 8 {
        return Err(SigError::Shape(format!(
            "binary header announces {batch}x{samples}x{d} values ({} bytes), body has {} bytes",
            count * 8,
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PathBatch::new(batch, samples, d, data)
}

pub fn encode_binary(paths: &PathBatch) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + paths.as_slice().len() * 8);
    out.extend_from_slice(BINARY_MAGIC);
    for v in [paths.batch(), paths.samples(), paths.d()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for v in paths.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn parse_number(field: &str, row: usize, col: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        SigError::Parse(format!(
            "row {row}, column {col}: {:?} is not a number",
            field.trim()
        ))
    })
}

/// CSV with one sample per row. Paths are separated by blank lines or, with
/// `path_id_column`, by a change of value in the first column. Lines starting
/// with `#` are ignored.
pub fn parse_csv(text: &str, path_id_column: bool) -> Result<PathBatch> {
    let mut paths: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut current: Vec<Vec<f64>> = Vec::new();
    let mut current_id: Option<String> = None;
    let mut seen_ids: Vec<String> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !path_id_column && !current.is_empty() {
                paths.push(std::mem::take(&mut current));
            }
            continue;
        }
        let mut fields = line.split(',');
        if path_id_column {
            let id = fields.next().unwrap_or_default().trim().to_string();
            if current_id.as_deref() != Some(id.as_str()) {
                if seen_ids.contains(&id) {
                    return Err(SigError::Parse(format!(
                        "row {row}: rows of path {id:?} are not contiguous"
                    )));
                }
                if !current.is_empty() {
                    paths.push(std::mem::take(&mut current));
                }
                seen_ids.push(id.clone());
                current_id = Some(id);
            }
        }
        let first_col = if path_id_column { 2 } else { 1 };
        let values = fields
            .enumerate()
            .map(|(c, f)| parse_number(f, row, c + first_col))
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(SigError::Parse(format!("row {row} has no channel values")));
        }
        current.push(values);
    }
    if !current.is_empty() {
        paths.push(current);
    }
    if paths.is_empty() {
        return Err(SigError::Parse("input contains no samples".into()));
    }
    let samples = paths[0].len();
    let d = paths[0][0].len();
    for (b, p) in paths.iter().enumerate() {
        if p.len() != samples {
            return Err(SigError::Shape(format!(
                "path {b} has {} samples, path 0 has {samples}",
                p.len()
            )));
        }
        if let Some(j) = p.iter().position(|s| s.len() != d) {
            return Err(SigError::Shape(format!(
                "path {b}, sample {j} has {} channels, expected {d}",
                p[j].len()
            )));
        }
    }
    PathBatch::from_paths(&paths)
}

/// Window pairs `l,r`, one per line, 0-based sample indices.
pub fn parse_windows(text: &str) -> Result<WindowSpec> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| {
                SigError::Parse(format!(
                    "windows row {}: {s:?} is not a sample index",
                    i + 1
                ))
            })
        };
        if parts.len() != 2 {
            return Err(SigError::Parse(format!(
                "windows row {} must have exactly two columns",
                i + 1
            )));
        }
        pairs.push((parse(parts[0])?, parse(parts[1])?));
    }
    Ok(WindowSpec::new(pairs))
}

pub fn read_windows(path: &Path) -> Result<WindowSpec> {
    let bytes = read_bytes(path)?;
    parse_windows(&String::from_utf8_lossy(&bytes))
}

/// Formats a value with 17 significant digits.
pub fn fmt_f64(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").unwrap();
}

/// CSV with a header of word labels and one row per path.
pub fn coefficients_csv(labels: &[String], batch: usize, values: &[f64]) -> String {
    let width = labels.len();
    let mut out = labels.join(",");
    out.push('\n');
    for b in 0..batch {
        for (i, v) in values[b * width..(b + 1) * width].iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            fmt_f64(&mut out, *v);
        }
        out.push('\n');
    }
    out
}
