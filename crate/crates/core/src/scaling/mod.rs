//! Scaling-law analysis of converged losses.
//!
//! - [`fit_power_law`] fits `L(s) = A + B * s^(-exponent)` against data size
//!   or parameter count, excluding runs flagged as trapped.
//! - [`detect_trapped`] flags runs stuck on an anomalously high plateau.
//! - [`plan_dataset_size`] inverts a fit for the scale that reaches a target loss.
//! - [`fit_batch_tradeoff`] and [`steps_to_target`] cover batch-size sweeps.

mod batch;
mod points;
mod power_law;
mod trapped;

pub use batch::{fit_batch_tradeoff, steps_to_target, windowed_medians, BatchTradeoffFit};
pub use points::{read_points_csv, write_points_csv, ScalingPoint};
pub use power_law::{fit_power_law, plan_dataset_size, FloorMode, PowerLawFit, ScalingMode};
pub use trapped::{detect_trapped, trapped_diagnostics, TrappedDiagnostics, TrappedPolicy};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalingError {
    #[error("need at least {required} usable points, found {found}")]
    InsufficientPoints { required: usize, found: usize },
    #[error("need at least 3 distinct scales, found {0}")]
    NonDistinctScales(usize),
    #[error("run {run_id}: {reason}")]
    InvalidPoint { run_id: String, reason: String },
    #[error("target below asymptotic floor (target {target}, floor {floor})")]
    TargetBelowFloor { target: f64, floor: f64 },
    #[error("law cannot be inverted (exponent {0} <= 0)")]
    NonInvertible(f64),
    #[error("cohort of {0} runs is too small; at least 3 are required")]
    CohortTooSmall(usize),
    #[error("{points} points but {logs} run logs")]
    LengthMismatch { points: usize, logs: usize },
    #[error("run {0} has an empty log")]
    EmptyLog(String),
    #[error("invalid batch point: {0}")]
    InvalidBatchPoint(String),
    #[error("fitted asymptotic step count {0} is not positive")]
    DegenerateBatchFit(f64),
    #[error("points file: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, ScalingError>;
