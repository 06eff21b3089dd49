use serde::{Deserialize, Serialize};

use super::{Result, ScalingError};
use crate::runlog::RunLog;
use crate::stats::{median, ols};

/// Trailing-window medians of the loss: entry `i` covers entries
/// `i + 1 - window ..= i` and is paired with the step of entry `i`.
pub fn windowed_medians(log: &RunLog, window: usize) -> Vec<(u64, f64)> {
    let w = window.max(1);
    if log.len() < w {
        return Vec::new();
    }
    let losses = log.losses();
    (w - 1..log.len())
        .map(|i| (log.entries[i].step, median(&losses[i + 1 - w..=i]).expect("non-empty window")))
        .collect()
}

/// First step whose trailing windowed median loss is at or below `target_loss`.
/// A window of 0 is treated as 1.
pub fn steps_to_target(log: &RunLog, target_loss: f64, smoothing_window: usize) -> Option<u64> {
    windowed_medians(log, smoothing_window)
        .into_iter()
        .find(|&(_, m)| m <= target_loss)
        .map(|(step, _)| step)
}

/// Steps-to-target model `S(B) = s_min * (1 + b_crit / B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchTradeoffFit {
    pub s_min: f64,
    pub b_crit: f64,
    /// `b_crit` below a quarter of the smallest tested batch.
    pub below_tested_range: bool,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

impl BatchTradeoffFit {
    pub fn predict(&self, batch: f64) -> f64 {
        self.s_min * (1.0 + self.b_crit / batch)
    }
}

/// Least-squares fit of `S = s_min + (s_min * b_crit) / B`, linear in `1 / B`.
///
/// A negative fitted slope (steps growing with batch size) is outside the
/// model family; `b_crit` is then clamped to 0 and `s_min` is the mean step count.
pub fn fit_batch_tradeoff(points: &[(f64, f64)]) -> Result<BatchTradeoffFit> {
    for &(b, s) in points {
        if !(b > 0.0) || !b.is_finite() {
            return Err(ScalingError::InvalidBatchPoint(format!("batch size {b}")));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(ScalingError::InvalidBatchPoint(format!("steps {s} at batch {b}")));
        }
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if points.len() < 3 || distinct.len() < 3 {
        return Err(ScalingError::InsufficientPoints {
            required: 3,
            found: distinct.len(),
        });
    }
    let inv: Vec<f64> = points.iter().map(|p| 1.0 / p.0).collect();
    let steps: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = ols(&inv, &steps).expect("three distinct batch sizes");
    let (s_min, b_crit, r2) = if fit.slope > 0.0 {
        if !(fit.intercept > 0.0) {
            return Err(ScalingError::DegenerateBatchFit(fit.intercept));
        }
        (fit.intercept, fit.slope / fit.intercept, fit.r_squared())
    } else {
        let mean = steps.iter().sum::<f64>() / steps.len() as f64;
        (mean, 0.0, 0.0)
    };
    Ok(BatchTradeoffFit {
        s_min,
        b_crit,
        below_tested_range: b_crit < distinct[0] / 4.0,
        r_squared: r2,
        points: points.to_vec(),
    })
}
