use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::ScenarioError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header row and one row per record.
pub fn emit_csv<I>(path: &Path, header: &[String], rows: I) -> Result<(), ScenarioError>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let io = |e: std::io::Error| ScenarioError::Io(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(ScenarioError::Io(format!(
                "{}: row has {} fields, header has {}",
                path.display(),
                row.len(),
                header.len()
            )));
        }
        let line: Vec<String> = row.into_iter().map(format_value).collect();
        writeln!(w, "{}", line.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}
