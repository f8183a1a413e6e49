//! Streaming convergence log.

use std::fs::File;
use std::path::{Path, PathBuf};

use crate::nonlinear::IterationRecord;

pub const HEADER: [&str; 7] = ["iter", "residual", "rel_residual", "energy", "step_length", "backtracks", "wall_time_s"];

#[derive(Debug, thiserror::Error)]
#[error("cannot write convergence log {path}: {source}")]
pub struct CsvError {
    pub path: PathBuf,
    #[source]
    pub source: csv::Error,
}

/// Writes one row per iteration and flushes after each, so partial logs
/// survive a failed run.
pub struct ConvergenceCsv {
    writer: csv::Writer<File>,
    path: PathBuf,
}

impl ConvergenceCsv {
    pub fn create(path: &Path) -> Result<Self, CsvError> {
        let err = |source| CsvError { path: path.to_path_buf(), source };
        let mut writer = csv::Writer::from_path(path).map_err(err)?;
        writer.write_record(HEADER).map_err(err)?;
        writer.flush().map_err(|e| err(e.into()))?;
        Ok(Self { writer, path: path.to_path_buf() })
    }

    pub fn write(&mut self, r: &IterationRecord) -> Result<(), CsvError> {
        let row = [
            r.iter.to_string(),
            r.residual.to_string(),
            r.rel_residual.to_string(),
            r.energy.to_string(),
            r.step_length.to_string(),
            r.backtracks.to_string(),
            r.wall_time.to_string(),
        ];
        let path = &self.path;
        self.writer.write_record(&row).map_err(|source| CsvError { path: path.clone(), source })?;
        self.writer.flush().map_err(|e| CsvError { path: path.clone(), source: e.into() })?;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Writes a whole history at once.
pub fn write_convergence_csv(path: &Path, rows: &[IterationRecord]) -> Result<(), CsvError> {
    let mut w = ConvergenceCsv::create(path)?;
    for r in rows {
        w.write(r)?;
    }
    Ok(())
}
