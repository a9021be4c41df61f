use std::io::Write;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::args::Format;
use crate::error::CliError;

/// Record type with a fixed column order.
pub trait Record: Serialize {
    const HEADER: &'static [&'static str];
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn sig12<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round12(*x))
}

/// Serializes records as CSV or as a JSON array.
pub fn encode<R: Record>(records: &[R], format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record(R::HEADER)?;
            for r in records {
                w.serialize(r)?;
            }
            w.into_inner().map_err(|e| CliError::Encode(e.to_string()))
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(records)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Writes to `path` through a temporary file in the same directory, or to
/// standard output. Nothing is left behind if writing fails.
pub fn write_output(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| CliError::Write(e.error))?;
        }
    }
    Ok(())
}
