use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use socialnet_core::{Cost, Error, Result};

pub fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(Error::from),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush().map_err(Error::from)
        }
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    write_text(path, &json(value)?)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush().map_err(Error::from)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(io::Error::other(e))
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Exact token and decimal, as two CSV cells.
pub fn cost_cells(c: Cost) -> [String; 2] {
    let repr = socialnet_core::report::CostRepr::from(c);
    [repr.value, repr.decimal.to_string()]
}
