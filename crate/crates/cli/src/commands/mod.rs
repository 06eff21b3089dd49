pub mod batch;
pub mod fit;
pub mod label;
pub mod plan;
pub mod sample;
pub mod schedule;
pub mod simulate;
pub mod summarize;
pub mod triage;

use anyhow::{bail, Context};

/// Comma-separated positive integers; `5e3` style is accepted when integral.
pub fn parse_sizes(text: &str) -> anyhow::Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let v: f64 = s.parse().with_context(|| format!("size {s:?} is not a number"))?;
            if !(v >= 1.0) || v.fract() != 0.0 || v > usize::MAX as f64 {
                bail!("size {s:?} must be a positive integer");
            }
            Ok(v as usize)
        })
        .collect()
}
