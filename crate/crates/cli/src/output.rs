use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// Full double precision, 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Io(io::Error::other(e)))
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::Io(io::Error::other(e));
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(io::Error::other(e)))
}

pub fn numeric_rows<const N: usize>(rows: &[[f64; N]]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|&x| num(x)).collect()).collect()
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(CliError::Io),
        None => {
            let mut out = io::stdout().lock();
            let res = out.write_all(text.as_bytes()).and_then(|_| {
                if text.ends_with('\n') {
                    Ok(())
                } else {
                    out.write_all(b"\n")
                }
            });
            match res {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(CliError::Io),
            }
        }
    }
}

pub fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), text).map_err(CliError::Io)
}
