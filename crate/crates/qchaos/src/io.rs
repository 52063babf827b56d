//! File formats: tabulated potentials in, CSV tables and JSON documents out.
//!
//! CSV output always uses `.` as decimal separator and `\n` line endings.
//! Floats are written in shortest round-trip form, `inf`/`-inf` for
//! divergent borders.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};

/// Reads a two-column `x, V₀(x)` table. Lines starting with `#` are ignored.
pub fn read_potential_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::config(format!("cannot read potential table {}: {e}", path.display())))?;
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record
            .map_err(|e| CliError::config(format!("{}: malformed row {}: {e}", path.display(), line + 1)))?;
        if record.len() != 2 {
            return Err(CliError::config(format!(
                "{}: row {} has {} columns, expected 2",
                path.display(),
                line + 1,
                record.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                CliError::config(format!("{}: row {}: `{s}` is not a number", path.display(), line + 1))
            })
        };
        xs.push(parse(&record[0])?);
        vs.push(parse(&record[1])?);
    }
    if xs.len() < 2 {
        return Err(CliError::config(format!("{}: need at least two rows", path.display())));
    }
    Ok((xs, vs))
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v != 0.0 && !(1e-4..1e16).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Writes `header` and `rows` as CSV.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let to_io = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(to_io)?;
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(row).map_err(to_io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}
