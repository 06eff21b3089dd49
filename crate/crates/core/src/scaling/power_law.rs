use serde::{Deserialize, Serialize};

use super::{Result, ScalingError, ScalingPoint};
use crate::stats::{ols, r_squared, LinearFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    /// Scale is the number of full-scene training images.
    DataScaling,
    /// Scale is the encoder parameter count.
    ParameterScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloorMode {
    /// `A = 0`: plain log-log regression.
    FixedZero,
    /// `A` searched in `[0, min loss)`.
    Free,
}

/// Fitted `L(s) = A + B * s^(-exponent)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    #[serde(rename = "A")]
    pub floor: f64,
    #[serde(rename = "B")]
    pub coefficient: f64,
    pub exponent: f64,
    /// R² of `log(L - A)` against `log(s)` over the fitted points.
    pub r_squared_loglog: f64,
    /// R² of the fitted curve against `L` in linear space.
    pub r_squared_linear: f64,
    /// Run ids of trapped points left out of the fit.
    pub excluded: Vec<String>,
    pub mode: ScalingMode,
    pub floor_mode: FloorMode,
    pub n_points: usize,
}

impl PowerLawFit {
    pub fn predict(&self, scale: f64) -> f64 {
        self.floor + self.coefficient * scale.powf(-self.exponent)
    }
}

const FLOOR_GRID: usize = 400;
const GOLDEN_ITERATIONS: usize = 200;

/// Fits the power law on the non-trapped points.
///
/// With [`FloorMode::FixedZero`] this is ordinary least squares of
/// `ln(loss)` on `ln(scale)`: the slope is `-exponent` and the intercept
/// `ln B`. With [`FloorMode::Free`] the floor `A` is chosen to minimize the
/// residual sum of squares of that regression applied to `ln(loss - A)`,
/// using a grid over `[0, min loss)` refined by golden-section search.
pub fn fit_power_law(points: &[ScalingPoint], mode: ScalingMode, floor: FloorMode) -> Result<PowerLawFit> {
    for p in points {
        p.check()?;
    }
    let excluded: Vec<String> = points.iter().filter(|p| p.trapped).map(|p| p.run_id.clone()).collect();
    let usable: Vec<&ScalingPoint> = points.iter().filter(|p| !p.trapped).collect();
    if usable.len() < 3 {
        return Err(ScalingError::InsufficientPoints {
            required: 3,
            found: usable.len(),
        });
    }
    let mut distinct: Vec<f64> = usable.iter().map(|p| p.scale).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(ScalingError::NonDistinctScales(distinct.len()));
    }

    let log_scale: Vec<f64> = usable.iter().map(|p| p.scale.ln()).collect();
    let loss: Vec<f64> = usable.iter().map(|p| p.loss).collect();
    let floor_value = match floor {
        FloorMode::FixedZero => 0.0,
        FloorMode::Free => search_floor(&log_scale, &loss),
    };
    let fit = regress_at(&log_scale, &loss, floor_value).expect("floor stays below every loss");

    let coefficient = fit.intercept.exp();
    let exponent = -fit.slope;
    let mean = loss.iter().sum::<f64>() / loss.len() as f64;
    let (rss_lin, tss_lin) = usable.iter().fold((0.0, 0.0), |(r, t), p| {
        let pred = floor_value + coefficient * p.scale.powf(-exponent);
        (r + (p.loss - pred).powi(2), t + (p.loss - mean).powi(2))
    });
    Ok(PowerLawFit {
        floor: floor_value,
        coefficient,
        exponent,
        r_squared_loglog: fit.r_squared(),
        r_squared_linear: r_squared(rss_lin, tss_lin),
        excluded,
        mode,
        floor_mode: floor,
        n_points: usable.len(),
    })
}

fn regress_at(log_scale: &[f64], loss: &[f64], floor: f64) -> Option<LinearFit> {
    let y: Vec<f64> = loss.iter().map(|&l| (l - floor).ln()).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return None;
    }
    ols(log_scale, &y)
}

fn search_floor(log_scale: &[f64], loss: &[f64]) -> f64 {
    let min_loss = loss.iter().copied().fold(f64::INFINITY, f64::min);
    let rss = |a: f64| regress_at(log_scale, loss, a).map(|f| f.rss).unwrap_or(f64::INFINITY);

    let step = min_loss / FLOOR_GRID as f64;
    let grid: Vec<f64> = (0..FLOOR_GRID).map(|k| k as f64 * step).collect();
    let values: Vec<f64> = grid.iter().map(|&a| rss(a)).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("grid is non-empty");

    let mut lo = if best == 0 { 0.0 } else { grid[best - 1] };
    // stay strictly below the smallest loss
    let mut hi = if best + 1 < FLOOR_GRID {
        grid[best + 1]
    } else {
        min_loss * (1.0 - 1e-12)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = rss(x1);
    let mut f2 = rss(x2);
    for _ in 0..GOLDEN_ITERATIONS {
        if hi - lo <= f64::EPSILON * min_loss {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = rss(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = rss(x2);
        }
    }
    let refined = if f1 <= f2 { x1 } else { x2 };
    if rss(refined) <= values[best] {
        refined
    } else {
        grid[best]
    }
}

/// Scale needed to reach `target_loss`: `((target - A) / B)^(-1 / exponent)`.
pub fn plan_dataset_size(fit: &PowerLawFit, target_loss: f64) -> Result<f64> {
    if !(fit.exponent > 0.0) {
        return Err(ScalingError::NonInvertible(fit.exponent));
    }
    if !(target_loss > fit.floor) {
        return Err(ScalingError::TargetBelowFloor {
            target: target_loss,
            floor: fit.floor,
        });
    }
    Ok(((target_loss - fit.floor) / fit.coefficient).powf(-1.0 / fit.exponent))
}
