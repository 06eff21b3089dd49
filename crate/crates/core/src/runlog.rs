//! Per-step training telemetry (`step,loss,grad_norm,lr` CSV).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum RunLogError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("run log: {0}")]
    Csv(#[from] csv::Error),
    #[error("run log line {line}: steps must be strictly increasing")]
    NonMonotoneStep { line: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: u64,
    pub loss: f64,
    pub grad_norm: f64,
    pub lr: f64,
}

/// Telemetry of one run, ordered by strictly increasing step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub entries: Vec<LogEntry>,
}

impl RunLog {
    pub fn new(entries: Vec<LogEntry>) -> Self {
        Self { entries }
    }

    /// Builds a log with unit steps `0..losses.len()`, constant grad norm and lr.
    pub fn from_losses(losses: &[f64]) -> Self {
        Self::new(
            losses
                .iter()
                .enumerate()
                .map(|(i, &loss)| LogEntry {
                    step: i as u64,
                    loss,
                    grad_norm: 1.0,
                    lr: 0.0,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn losses(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.loss).collect()
    }

    /// Keeps the entries with `step <= last_step`.
    pub fn truncated(&self, last_step: u64) -> Self {
        Self::new(self.entries.iter().copied().filter(|e| e.step <= last_step).collect())
    }

    pub fn from_csv_str(text: &str) -> Result<Self, RunLogError> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut entries: Vec<LogEntry> = Vec::new();
        for (i, row) in rdr.deserialize().enumerate() {
            let e: LogEntry = row?;
            if let Some(prev) = entries.last() {
                if e.step <= prev.step {
                    return Err(RunLogError::NonMonotoneStep { line: i + 2 });
                }
            }
            entries.push(e);
        }
        Ok(Self { entries })
    }

    pub fn from_path(path: &Path) -> Result<Self, RunLogError> {
        let text = fs::read_to_string(path).map_err(|source| RunLogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_str(&text)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.entries.len() * 48);
        out.push_str("step,loss,grad_norm,lr\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{},{}\n", e.step, e.loss, e.grad_norm, e.lr));
        }
        out
    }
}
