use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Result, ScalingError};

/// One run's scale and converged loss (`run_id,scale,loss,trapped` in CSV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub run_id: String,
    /// Full-scene image count or encoder parameter count.
    pub scale: f64,
    pub loss: f64,
    #[serde(default)]
    pub trapped: bool,
}

impl ScalingPoint {
    pub fn new(run_id: impl Into<String>, scale: f64, loss: f64) -> Self {
        Self {
            run_id: run_id.into(),
            scale,
            loss,
            trapped: false,
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        let bad = |reason: &str| ScalingError::InvalidPoint {
            run_id: self.run_id.clone(),
            reason: reason.to_string(),
        };
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(bad("scale must be positive and finite"));
        }
        if !(self.loss > 0.0) || !self.loss.is_finite() {
            return Err(bad("loss must be positive and finite"));
        }
        Ok(())
    }
}

pub fn read_points_csv(path: &Path) -> Result<Vec<ScalingPoint>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| ScalingError::Io(format!("{}: {e}", path.display())))?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| ScalingError::Io(format!("{}: {e}", path.display()))))
        .collect()
}

pub fn write_points_csv(points: &[ScalingPoint]) -> String {
    let mut out = String::from("run_id,scale,loss,trapped\n");
    for p in points {
        out.push_str(&format!("{},{},{},{}\n", p.run_id, p.scale, p.loss, p.trapped));
    }
    out
}
