use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use geoscale_core::schedule::{triage_sweep, TriagePolicy};
use geoscale_core::RunLog;

use crate::config::GlobalConfig;
use crate::output::{csv_files, Staged};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory of run-log CSVs, one per candidate learning rate.
    #[arg(long)]
    runs: PathBuf,
    /// Policy TOML; built-in defaults when omitted.
    #[arg(long)]
    policy: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Candidate rate from a file stem like `lr_3e-4` or `3e-4`; otherwise the
/// largest `lr` value in the log.
fn candidate_lr(path: &Path, log: &RunLog) -> anyhow::Result<f64> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    let trimmed = stem.trim_start_matches("lr").trim_start_matches(['_', '-', '=']);
    if let Ok(v) = trimmed.parse::<f64>() {
        return Ok(v);
    }
    let max = log.entries.iter().map(|e| e.lr).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        bail!("{}: cannot determine the candidate learning rate", path.display());
    }
    Ok(max)
}

fn label<T: serde::Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_value(v)?.as_str().unwrap_or_default().to_string())
}

pub fn run(args: Args, global: &GlobalConfig) -> anyhow::Result<()> {
    let policy = match &args.policy {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            TriagePolicy::from_toml_str(&text)?
        }
        None => TriagePolicy::default(),
    };
    let files = csv_files(&args.runs)?;
    if files.is_empty() {
        bail!("no run logs in {}", args.runs.display());
    }
    let mut candidates = Vec::with_capacity(files.len());
    for f in &files {
        let log = RunLog::from_path(f).with_context(|| format!("reading {}", f.display()))?;
        candidates.push((candidate_lr(f, &log)?, log));
    }
    let outcome = triage_sweep(&candidates, &policy)?;

    let mut staged = Staged::default();
    staged.add_json(global.out_dir(args.out_dir).join("verdicts.json"), &outcome)?;
    staged.commit()?;
    println!("{:>12}  {:<6} {:<14} {:>10}", "lr", "status", "reason", "fail_step");
    for c in &outcome.verdicts {
        let v = &c.verdict;
        let step = v.fail_step.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
        println!("{:>12e}  {:<6} {:<14} {:>10}", c.lr, label(&v.status)?, label(&v.reason)?, step);
    }
    println!("survivors: {:?}", outcome.survivors);
    Ok(())
}
