//! Warmup-stable-decay learning rates and fail-fast triage of base rates.

mod triage;
mod wsd;

pub use triage::{triage, triage_sweep, CandidateVerdict, FailReason, SlopeCap, SweepOutcome, TriagePolicy, TriageStatus, TriageVerdict};
pub use wsd::WsdSchedule;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("step {step} outside [0, {total}]")]
    StepOutOfRange { step: u64, total: u64 },
    #[error("invalid triage policy: {0}")]
    InvalidPolicy(String),
    #[error("run log has {len} entries, shorter than the triage window {window}")]
    LogTooShort { len: usize, window: usize },
    #[error("no candidates to triage")]
    NoCandidates,
}

pub type Result<T> = std::result::Result<T, ScheduleError>;
