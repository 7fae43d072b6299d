//! Delimiter-separated numeric data files.

use std::fs;
use std::path::Path;

use depthrank::Sample;

use crate::error::{CliError, CliResult};

/// Picks the delimiter from the first non-empty line: comma, then tab, then
/// semicolon; files with a single column default to comma.
fn sniff_delimiter(text: &str) -> u8 {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    [b',', b'\t', b';'].into_iter().find(|d| first.as_bytes().contains(d)).unwrap_or(b',')
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads one observation per row. The first row is a header iff any of its
/// cells fails to parse as a finite number.
pub fn read_sample(path: &Path) -> CliResult<Sample> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })?;
    parse_sample(&text, path)
}

pub fn parse_sample(text: &str, path: &Path) -> CliResult<Sample> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(text))
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut dim: Option<usize> = None;
    let mut data = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(parse_cell).collect();
        if first {
            first = false;
            if parsed.iter().any(Option::is_none) {
                continue;
            }
        }
        match dim {
            None => dim = Some(parsed.len()),
            Some(d) if d != parsed.len() => {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line,
                    column: parsed.len().min(d) + 1,
                    message: format!("expected {d} columns, found {}", parsed.len()),
                })
            }
            _ => {}
        }
        for (col, v) in parsed.iter().enumerate() {
            match v {
                Some(x) => data.push(*x),
                None => {
                    return Err(CliError::Parse {
                        path: path.to_path_buf(),
                        line,
                        column: col + 1,
                        message: format!("'{}' is not a finite number", record[col].trim()),
                    })
                }
            }
        }
    }
    let dim = dim.ok_or_else(|| CliError::File {
        path: path.to_path_buf(),
        message: "no numeric rows".into(),
    })?;
    Ok(Sample::from_row_major(dim, data)?)
}
