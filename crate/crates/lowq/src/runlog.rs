use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use lowq_core::train::StepRecord;

use crate::error::{AppError, AppResult};

pub const HEADER: &str = "step,epoch,loss,wall_ms,accuracy";

/// Incremental loss CSV. Each row is flushed as soon as it is written.
pub struct LossLog {
    path: PathBuf,
    out: BufWriter<File>,
    timing: bool,
}

impl LossLog {
    pub fn create(path: &Path, timing: bool) -> AppResult<Self> {
        let file = File::create(path).map_err(|e| AppError::io(path, e))?;
        let mut log = LossLog {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
            timing,
        };
        log.line(HEADER)?;
        Ok(log)
    }

    fn line(&mut self, text: &str) -> AppResult<()> {
        writeln!(self.out, "{text}")
            .and_then(|_| self.out.flush())
            .map_err(|e| AppError::io(&self.path, e))
    }

    pub fn record(&mut self, r: &StepRecord) -> AppResult<()> {
        let wall = if self.timing {
            format!("{:.3}", r.wall_ms)
        } else {
            String::new()
        };
        let acc = r.accuracy.map(|a| a.to_string()).unwrap_or_default();
        self.line(&format!("{},{},{},{},{}", r.step, r.epoch, r.loss, wall, acc))
    }
}
