//! Synthetic training telemetry with known ground truth.
//!
//! Stable runs approach `L_final = A + B * scale^(-exponent)` exponentially
//! with time constant `tau`. Trapped runs switch at `trap_step` to a plateau
//! at `trap_floor_multiplier * L_final`. Divergent runs grow geometrically
//! after `divergence_onset`. Noise is multiplicative log-normal.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::runlog::{LogEntry, RunLog};
use crate::scaling::ScalingPoint;
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulator config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    Stable,
    Divergent,
    Trapped,
}

/// `L(s) = a + b * s^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub a: f64,
    pub b: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn new(a: f64, b: f64, exponent: f64) -> Self {
        Self { a, b, exponent }
    }

    pub fn eval(&self, scale: f64) -> f64 {
        self.a + self.b * scale.powf(-self.exponent)
    }
}

fn default_initial_loss() -> f64 {
    2.0
}
fn default_growth() -> f64 {
    1.01
}
fn default_multiplier() -> f64 {
    2.0
}
fn default_lr() -> f64 {
    1e-4
}
fn default_grad() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mode: SimMode,
    pub law: PowerLaw,
    pub scale: f64,
    pub total_steps: u64,
    #[serde(default)]
    pub noise_sigma: f64,
    /// Divergent mode: first step of geometric growth. Defaults to `total_steps / 2`.
    #[serde(default)]
    pub divergence_onset: Option<u64>,
    #[serde(default = "default_multiplier")]
    pub trap_floor_multiplier: f64,
    /// Trapped mode: step at which the run settles toward its plateau.
    /// Defaults to `tau`.
    #[serde(default)]
    pub trap_step: Option<u64>,
    #[serde(default = "default_initial_loss")]
    pub initial_loss: f64,
    #[serde(default = "default_grad")]
    pub initial_grad_norm: f64,
    /// Per-step growth factor after divergence onset.
    #[serde(default = "default_growth")]
    pub growth_rate: f64,
    /// Decay time constant in steps. Defaults to `total_steps / 8`.
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SimConfig {
    pub fn new(mode: SimMode, law: PowerLaw, scale: f64, total_steps: u64, seed: u64) -> Self {
        Self {
            mode,
            law,
            scale,
            total_steps,
            noise_sigma: 0.0,
            divergence_onset: None,
            trap_floor_multiplier: default_multiplier(),
            trap_step: None,
            initial_loss: default_initial_loss(),
            initial_grad_norm: default_grad(),
            growth_rate: default_growth(),
            tau: None,
            lr: default_lr(),
            seed,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(self.total_steps as f64 / 8.0)
    }

    pub fn final_loss(&self) -> f64 {
        self.law.eval(self.scale)
    }

    /// Loss the run settles at without noise.
    pub fn asymptotic_loss(&self) -> f64 {
        match self.mode {
            SimMode::Trapped => self.trap_floor_multiplier * self.final_loss(),
            _ => self.final_loss(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if self.total_steps == 0 {
            return bad("total_steps must be positive");
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return bad("noise_sigma must be >= 0");
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return bad("scale must be positive");
        }
        if !(self.trap_floor_multiplier > 1.0) {
            return bad("trap_floor_multiplier must be > 1");
        }
        if self.divergence_onset.is_some_and(|s| s > self.total_steps) {
            return bad("divergence_onset must be <= total_steps");
        }
        if self.trap_step.is_some_and(|s| s > self.total_steps) {
            return bad("trap_step must be <= total_steps");
        }
        if !(self.tau() > 0.0) {
            return bad("tau must be positive");
        }
        if !(self.initial_loss > 0.0) || !(self.initial_grad_norm > 0.0) || !(self.growth_rate > 1.0) {
            return bad("initial_loss, initial_grad_norm must be positive and growth_rate > 1");
        }
        let lf = self.final_loss();
        if !(lf > 0.0) || !lf.is_finite() {
            return bad("law must give a positive finite loss at this scale");
        }
        Ok(())
    }
}

/// One log entry per step `1..=total_steps`.
pub fn simulate_run(config: &SimConfig) -> Result<RunLog> {
    config.validate()?;
    let tau = config.tau();
    let lf = config.final_loss();
    let l0 = config.initial_loss;
    let g0 = config.initial_grad_norm;
    let stable = |t: f64| lf + (l0 - lf) * (-t / tau).exp();
    let grad = |t: f64| g0 * (0.4 + 0.6 * (-t / (2.0 * tau)).exp());

    let onset = config.divergence_onset.unwrap_or(config.total_steps / 2);
    let trap_step = config.trap_step.unwrap_or(tau.round() as u64);
    let trap_level = config.trap_floor_multiplier * lf;
    let trap_start = stable(trap_step as f64);

    let mut rng = rng_from_seed(config.seed);
    let sigma = config.noise_sigma;
    let mut entries = Vec::with_capacity(config.total_steps as usize);
    for step in 1..=config.total_steps {
        let t = step as f64;
        let (loss, g) = match config.mode {
            SimMode::Stable => (stable(t), grad(t)),
            SimMode::Trapped if step >= trap_step => {
                let dt = (step - trap_step) as f64;
                (trap_level + (trap_start - trap_level) * (-dt / tau).exp(), grad(t))
            }
            SimMode::Trapped => (stable(t), grad(t)),
            SimMode::Divergent if step > onset => {
                let k = config.growth_rate.powf((step - onset) as f64);
                (stable(onset as f64) * k, grad(onset as f64) * k)
            }
            SimMode::Divergent => (stable(t), grad(t)),
        };
        // two draws per step regardless of sigma keeps streams aligned across configs
        let z_loss: f64 = StandardNormal.sample(&mut rng);
        let z_grad: f64 = StandardNormal.sample(&mut rng);
        entries.push(LogEntry {
            step,
            loss: loss * (sigma * z_loss).exp(),
            grad_norm: g * (sigma * z_grad).exp(),
            lr: config.lr,
        });
    }
    Ok(RunLog::new(entries))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub law: PowerLaw,
    pub scales: Vec<f64>,
    #[serde(default)]
    pub trapped_fraction: f64,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub total_steps: u64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default = "default_multiplier")]
    pub trap_floor_multiplier: f64,
    #[serde(default)]
    pub trap_step: Option<u64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_initial_loss")]
    pub initial_loss: f64,
}

impl EnsembleConfig {
    pub fn new(law: PowerLaw, scales: Vec<f64>, trapped_fraction: f64, seeds: Vec<u64>, total_steps: u64) -> Self {
        Self {
            law,
            scales,
            trapped_fraction,
            seeds,
            total_steps,
            noise_sigma: 0.0,
            trap_floor_multiplier: default_multiplier(),
            trap_step: None,
            tau: None,
            initial_loss: default_initial_loss(),
        }
    }

    /// Run `i` (scale-major, then seed) is trapped when
    /// `floor((i + 1) * f) > floor(i * f)`, which spreads trapped runs evenly.
    pub fn is_trapped(&self, run: usize) -> bool {
        let f = self.trapped_fraction;
        ((run + 1) as f64 * f).floor() > (run as f64 * f).floor()
    }

    fn run_config(&self, run: usize) -> SimConfig {
        let scale_idx = run / self.seeds.len();
        let seed = self.seeds[run % self.seeds.len()];
        let mode = if self.is_trapped(run) { SimMode::Trapped } else { SimMode::Stable };
        let mut c = SimConfig::new(
            mode,
            self.law,
            self.scales[scale_idx],
            self.total_steps,
            derive_seed(seed, scale_idx as u64),
        );
        c.noise_sigma = self.noise_sigma;
        c.trap_floor_multiplier = self.trap_floor_multiplier;
        c.trap_step = self.trap_step;
        c.tau = self.tau;
        c.initial_loss = self.initial_loss;
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedRun {
    pub point: ScalingPoint,
    pub log: RunLog,
}

/// One run per (scale, seed). Each point's loss is the run's converged loss
/// with one multiplicative noise draw from the run's own stream; its
/// `trapped` field carries the true label.
pub fn simulate_ensemble(config: &EnsembleConfig) -> Result<Vec<SimulatedRun>> {
    if config.scales.is_empty() || config.seeds.is_empty() {
        return Err(SimError::InvalidConfig("scales and seeds must be non-empty".into()));
    }
    if !(0.0..=1.0).contains(&config.trapped_fraction) {
        return Err(SimError::InvalidConfig("trapped_fraction must lie in [0, 1]".into()));
    }
    let n = config.scales.len() * config.seeds.len();
    (0..n)
        .into_par_iter()
        .map(|run| {
            let c = config.run_config(run);
            let log = simulate_run(&c)?;
            let mut rng = rng_from_seed(derive_seed(c.seed, u64::MAX));
            let z: f64 = StandardNormal.sample(&mut rng);
            let mut point = ScalingPoint::new(
                format!("N{}_s{}", c.scale, config.seeds[run % config.seeds.len()]),
                c.scale,
                c.asymptotic_loss() * (c.noise_sigma * z).exp(),
            );
            point.trapped = c.mode == SimMode::Trapped;
            Ok(SimulatedRun { point, log })
        })
        .collect()
}
