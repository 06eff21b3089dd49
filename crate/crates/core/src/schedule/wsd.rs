use serde::{Deserialize, Serialize};

use super::{Result, ScheduleError};

/// Warmup-stable-decay learning-rate schedule.
///
/// Linear ramp from 0 to `base_lr` over the warmup fraction, constant on the
/// plateau, then exponential decay `base_lr * r^s` with `s` running from 0 to
/// 1 over the decay fraction and `r = decay_floor_ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WsdSchedule {
    pub base_lr: f64,
    pub total_steps: u64,
    #[serde(default = "default_warmup")]
    pub warmup_frac: f64,
    #[serde(default = "default_stable")]
    pub stable_frac: f64,
    #[serde(default = "default_decay")]
    pub decay_frac: f64,
    #[serde(default = "default_floor")]
    pub decay_floor_ratio: f64,
}

fn default_warmup() -> f64 {
    0.10
}
fn default_stable() -> f64 {
    0.80
}
fn default_decay() -> f64 {
    0.10
}
fn default_floor() -> f64 {
    0.01
}

impl WsdSchedule {
    /// 10% warmup, 80% plateau, 10% decay to 1% of the base rate.
    pub fn new(base_lr: f64, total_steps: u64) -> Result<Self> {
        Self {
            base_lr,
            total_steps,
            warmup_frac: default_warmup(),
            stable_frac: default_stable(),
            decay_frac: default_decay(),
            decay_floor_ratio: default_floor(),
        }
        .validated()
    }

    pub fn with_fractions(mut self, warmup: f64, stable: f64, decay: f64) -> Result<Self> {
        self.warmup_frac = warmup;
        self.stable_frac = stable;
        self.decay_frac = decay;
        self.validated()
    }

    pub fn with_floor_ratio(mut self, ratio: f64) -> Result<Self> {
        self.decay_floor_ratio = ratio;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |m: &str| Err(ScheduleError::InvalidSchedule(m.to_string()));
        if !(self.base_lr > 0.0) || !self.base_lr.is_finite() {
            return bad("base_lr must be positive");
        }
        if self.total_steps == 0 {
            return bad("total_steps must be positive");
        }
        let fr = [self.warmup_frac, self.stable_frac, self.decay_frac];
        if fr.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
            return bad("phase fractions must be nonnegative");
        }
        if (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("phase fractions must sum to 1");
        }
        if !(self.decay_floor_ratio > 0.0 && self.decay_floor_ratio <= 1.0) {
            return bad("decay_floor_ratio must lie in (0, 1]");
        }
        Ok(self)
    }

    /// Step at which the plateau begins (may be fractional).
    pub fn warmup_end(&self) -> f64 {
        self.warmup_frac * self.total_steps as f64
    }

    /// Step at which decay begins (may be fractional).
    pub fn decay_start(&self) -> f64 {
        (self.warmup_frac + self.stable_frac) * self.total_steps as f64
    }

    pub fn lr_at(&self, step: u64) -> Result<f64> {
        if step > self.total_steps {
            return Err(ScheduleError::StepOutOfRange {
                step,
                total: self.total_steps,
            });
        }
        let t = step as f64;
        let total = self.total_steps as f64;
        let warmup_end = self.warmup_end();
        let decay_start = self.decay_start().min(total);
        if t < warmup_end {
            return Ok(self.base_lr * t / warmup_end);
        }
        let decay_len = total - decay_start;
        if t <= decay_start || decay_len <= 0.0 {
            return Ok(self.base_lr);
        }
        let s = ((t - decay_start) / decay_len).min(1.0);
        Ok(self.base_lr * self.decay_floor_ratio.powf(s))
    }

    /// `(step, lr)` every `every` steps, always including the final step.
    pub fn table(&self, every: u64) -> Vec<(u64, f64)> {
        let every = every.max(1);
        let mut rows: Vec<(u64, f64)> = (0..=self.total_steps)
            .step_by(every as usize)
            .map(|s| (s, self.lr_at(s).expect("in range")))
            .collect();
        if rows.last().map(|r| r.0) != Some(self.total_steps) {
            rows.push((self.total_steps, self.lr_at(self.total_steps).expect("in range")));
        }
        rows
    }
}
