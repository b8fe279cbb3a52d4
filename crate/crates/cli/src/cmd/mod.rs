pub mod analyze;
pub mod crawl;
pub mod generate;
pub mod mismatch;
pub mod report;
pub mod simulate;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use crate::error::CliError;

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Create `path` and hand a buffered writer to `write`.
pub fn write_file(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write(&mut w).map_err(|e| CliError::io(path, e))?;
    std::io::Write::flush(&mut w).map_err(|e| CliError::io(path, e))
}

/// Two-column `metric,value` CSV.
pub fn write_metrics(path: &Path, rows: &[(String, String)]) -> Result<(), CliError> {
    write_file(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "value"])?;
        for (k, v) in rows {
            w.write_record([k, v])?;
        }
        w.flush()
    })
}

/// Reads a `metric,value` CSV back.
pub fn read_metrics(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let headers = r.headers().map_err(|e| CliError::io(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["metric", "value"] {
        return Err(CliError::Input(format!("{}: expected columns metric,value", path.display())));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| CliError::io(path, e))?;
            Ok((rec[0].to_string(), rec[1].to_string()))
        })
        .collect()
}

pub fn fmt(x: f64) -> String {
    format!("{x:.6}")
}
