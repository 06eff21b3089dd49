use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Result, ScheduleError};
use crate::runlog::RunLog;
use crate::stats::{median, ols};

/// Upper bound on the least-squares grad-norm slope inside a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeCap {
    /// Fixed cap in grad-norm units per step.
    Fixed(f64),
    /// Cap equal to this multiple of the slope's standard error in the same window.
    StdErrMultiple(f64),
}

impl SlopeCap {
    fn cap(&self, slope_std_err: f64) -> f64 {
        match *self {
            SlopeCap::Fixed(c) => c,
            SlopeCap::StdErrMultiple(k) => k * slope_std_err,
        }
    }
}

/// Thresholds of the fail-fast protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriagePolicy {
    /// Entries per trailing window.
    pub window: usize,
    /// Fail when a loss exceeds this multiple of its window median.
    pub spike_ratio: f64,
    /// Fail when more than this fraction of consecutive loss deltas flip sign.
    pub oscillation_frac: f64,
    pub gradnorm_slope_max: SlopeCap,
    /// Last step inspected.
    pub horizon: u64,
}

impl Default for TriagePolicy {
    fn default() -> Self {
        Self {
            window: 100,
            spike_ratio: 2.0,
            oscillation_frac: 0.6,
            gradnorm_slope_max: SlopeCap::StdErrMultiple(3.0),
            horizon: 2000,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    window: Option<usize>,
    spike_ratio: Option<f64>,
    oscillation_frac: Option<f64>,
    gradnorm_slope_max: Option<f64>,
    gradnorm_stderr_multiple: Option<f64>,
    horizon: Option<u64>,
}

impl TriagePolicy {
    pub fn validated(self) -> Result<Self> {
        let bad = |m: &str| Err(ScheduleError::InvalidPolicy(m.to_string()));
        if self.window < 2 {
            return bad("window must be >= 2");
        }
        if self.horizon < self.window as u64 {
            return bad("horizon must be >= window");
        }
        if !(self.spike_ratio > 0.0) {
            return bad("spike_ratio must be positive");
        }
        if !(0.0..=1.0).contains(&self.oscillation_frac) {
            return bad("oscillation_frac must lie in [0, 1]");
        }
        match self.gradnorm_slope_max {
            SlopeCap::Fixed(c) if c.is_nan() => return bad("gradnorm_slope_max must be a number"),
            SlopeCap::StdErrMultiple(k) if !(k >= 0.0) => return bad("gradnorm_stderr_multiple must be >= 0"),
            _ => {}
        }
        Ok(self)
    }

    /// Reads a TOML policy; missing keys take the defaults. Giving
    /// `gradnorm_slope_max` fixes the slope cap, otherwise the cap is
    /// `gradnorm_stderr_multiple` (default 3) standard errors.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: PolicyFile = toml::from_str(text).map_err(|e| ScheduleError::InvalidPolicy(e.to_string()))?;
        let d = Self::default();
        let cap = match (f.gradnorm_slope_max, f.gradnorm_stderr_multiple) {
            (Some(_), Some(_)) => {
                return Err(ScheduleError::InvalidPolicy(
                    "give either gradnorm_slope_max or gradnorm_stderr_multiple, not both".into(),
                ))
            }
            (Some(c), None) => SlopeCap::Fixed(c),
            (None, Some(k)) => SlopeCap::StdErrMultiple(k),
            (None, None) => d.gradnorm_slope_max,
        };
        Self {
            window: f.window.unwrap_or(d.window),
            spike_ratio: f.spike_ratio.unwrap_or(d.spike_ratio),
            oscillation_frac: f.oscillation_frac.unwrap_or(d.oscillation_frac),
            gradnorm_slope_max: cap,
            horizon: f.horizon.unwrap_or(d.horizon),
        }
        .validated()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TriageStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailReason {
    Spike,
    Oscillation,
    GradNormRise,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriageVerdict {
    pub status: TriageStatus,
    pub reason: FailReason,
    pub fail_step: Option<u64>,
    /// The statistic that crossed its threshold, for reporting.
    pub statistic: Option<f64>,
    pub threshold: Option<f64>,
}

impl TriageVerdict {
    fn pass() -> Self {
        Self {
            status: TriageStatus::Pass,
            reason: FailReason::None,
            fail_step: None,
            statistic: None,
            threshold: None,
        }
    }

    fn fail(reason: FailReason, step: u64, statistic: f64, threshold: f64) -> Self {
        Self {
            status: TriageStatus::Fail,
            reason,
            fail_step: Some(step),
            statistic: Some(statistic),
            threshold: Some(threshold),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == TriageStatus::Pass
    }
}

/// Scans the log up to the policy horizon and fails at the first step where
/// any criterion fires. All criteria look at the trailing window ending at
/// the current entry, so the verdict never depends on later entries.
///
/// Checked in order at each entry:
/// - spike: the entry's loss exceeds `spike_ratio` times the window median;
/// - oscillation: the fraction of consecutive loss deltas with opposite
///   signs exceeds `oscillation_frac`;
/// - grad-norm rise: the least-squares grad-norm slope (per step) exceeds the cap.
///
/// A non-finite loss fails as a spike and a non-finite grad norm as a rise,
/// at any entry.
pub fn triage(log: &RunLog, policy: &TriagePolicy) -> Result<TriageVerdict> {
    let policy = policy.validated()?;
    let w = policy.window;
    if log.len() < w {
        return Err(ScheduleError::LogTooShort { len: log.len(), window: w });
    }
    let entries = &log.entries;
    let mut losses = Vec::with_capacity(w);
    let mut steps = Vec::with_capacity(w);
    let mut grads = Vec::with_capacity(w);
    for (i, e) in entries.iter().enumerate() {
        if e.step > policy.horizon {
            break;
        }
        if !e.loss.is_finite() {
            return Ok(TriageVerdict::fail(FailReason::Spike, e.step, e.loss, policy.spike_ratio));
        }
        if !e.grad_norm.is_finite() {
            return Ok(TriageVerdict::fail(FailReason::GradNormRise, e.step, e.grad_norm, f64::INFINITY));
        }
        if i + 1 < w {
            continue;
        }
        let win = &entries[i + 1 - w..=i];
        losses.clear();
        losses.extend(win.iter().map(|x| x.loss));

        let med = median(&losses).expect("window is non-empty");
        if e.loss > policy.spike_ratio * med {
            return Ok(TriageVerdict::fail(FailReason::Spike, e.step, e.loss / med, policy.spike_ratio));
        }

        if w >= 3 {
            let flips = losses.windows(3).filter(|t| (t[1] - t[0]) * (t[2] - t[1]) < 0.0).count();
            let frac = flips as f64 / (w - 2) as f64;
            if frac > policy.oscillation_frac {
                return Ok(TriageVerdict::fail(FailReason::Oscillation, e.step, frac, policy.oscillation_frac));
            }
        }

        steps.clear();
        steps.extend(win.iter().map(|x| x.step as f64));
        grads.clear();
        grads.extend(win.iter().map(|x| x.grad_norm));
        if let Some(fit) = ols(&steps, &grads) {
            let cap = policy.gradnorm_slope_max.cap(fit.slope_std_err);
            if fit.slope > cap {
                return Ok(TriageVerdict::fail(FailReason::GradNormRise, e.step, fit.slope, cap));
            }
        }
    }
    Ok(TriageVerdict::pass())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateVerdict {
    pub lr: f64,
    pub verdict: TriageVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    /// One verdict per candidate, ascending by learning rate.
    pub verdicts: Vec<CandidateVerdict>,
    /// Learning rates that passed, ascending.
    pub survivors: Vec<f64>,
}

/// Triage of every candidate base rate; survivors graduate to full training.
pub fn triage_sweep(candidates: &[(f64, RunLog)], policy: &TriagePolicy) -> Result<SweepOutcome> {
    if candidates.is_empty() {
        return Err(ScheduleError::NoCandidates);
    }
    let mut verdicts = candidates
        .par_iter()
        .map(|(lr, log)| triage(log, policy).map(|verdict| CandidateVerdict { lr: *lr, verdict }))
        .collect::<Result<Vec<_>>>()?;
    verdicts.sort_by(|a, b| a.lr.total_cmp(&b.lr));
    let survivors = verdicts.iter().filter(|v| v.verdict.passed()).map(|v| v.lr).collect();
    Ok(SweepOutcome { verdicts, survivors })
}
