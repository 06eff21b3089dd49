use serde::{Deserialize, Serialize};

use super::{Result, ScalingError, ScalingPoint};
use crate::runlog::RunLog;
use crate::stats::{low_median, median, ols};

/// Thresholds for flagging runs stuck on a high plateau.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrappedPolicy {
    /// Median absolute deviations above the cohort reference.
    pub k: f64,
    /// A final-window loss slope of at least `-epsilon` per step counts as a plateau.
    /// The slope is taken at its upper two-standard-error bound.
    pub epsilon: f64,
    /// Entries in the final window.
    pub window: usize,
}

impl Default for TrappedPolicy {
    fn default() -> Self {
        Self {
            k: 3.0,
            epsilon: 1e-6,
            window: 100,
        }
    }
}

/// Per-run statistics behind a trapped verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrappedDiagnostics {
    pub final_loss: Vec<f64>,
    /// Upper two-standard-error bound on the final-window slope.
    pub final_slope: Vec<f64>,
    /// Cohort reference loss (lower median of the final losses).
    pub reference: f64,
    /// Lower median of absolute deviations from the reference.
    pub mad: f64,
    pub trapped: Vec<bool>,
}

/// Flags runs whose final windowed loss exceeds the cohort reference by more
/// than `k` median absolute deviations while still sitting on a plateau.
///
/// The reference and the deviation scale are lower medians, so a cohort in
/// which up to half the runs are trapped still anchors on the healthy runs.
pub fn detect_trapped(points: &[ScalingPoint], logs: &[RunLog], policy: &TrappedPolicy) -> Result<Vec<bool>> {
    trapped_diagnostics(points, logs, policy).map(|d| d.trapped)
}

pub fn trapped_diagnostics(points: &[ScalingPoint], logs: &[RunLog], policy: &TrappedPolicy) -> Result<TrappedDiagnostics> {
    if points.len() != logs.len() {
        return Err(ScalingError::LengthMismatch {
            points: points.len(),
            logs: logs.len(),
        });
    }
    if points.len() < 3 {
        return Err(ScalingError::CohortTooSmall(points.len()));
    }
    let window = policy.window.max(1);
    let mut final_loss = Vec::with_capacity(logs.len());
    let mut final_slope = Vec::with_capacity(logs.len());
    for (p, log) in points.iter().zip(logs) {
        if log.is_empty() {
            return Err(ScalingError::EmptyLog(p.run_id.clone()));
        }
        let tail = &log.entries[log.len().saturating_sub(window)..];
        let losses: Vec<f64> = tail.iter().map(|e| e.loss).collect();
        let steps: Vec<f64> = tail.iter().map(|e| e.step as f64).collect();
        final_loss.push(median(&losses).expect("non-empty tail"));
        // a slope within two standard errors of zero is not evidence of descent
        final_slope.push(ols(&steps, &losses).map(|f| f.slope + 2.0 * f.slope_std_err).unwrap_or(0.0));
    }
    let reference = low_median(&final_loss).expect("cohort is non-empty");
    let deviations: Vec<f64> = final_loss.iter().map(|l| (l - reference).abs()).collect();
    let mad = low_median(&deviations).expect("cohort is non-empty");
    let trapped = final_loss
        .iter()
        .zip(&final_slope)
        .map(|(&l, &s)| l > reference + policy.k * mad && s >= -policy.epsilon)
        .collect();
    Ok(TrappedDiagnostics {
        final_loss,
        final_slope,
        reference,
        mad,
        trapped,
    })
}
