use std::path::PathBuf;

use anyhow::Context;
use geoscale_core::scaling::plan_dataset_size;
use geoscale_core::PowerLawFit;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// fit.json written by `geoscale fit`.
    #[arg(long)]
    fit: PathBuf,
    /// Target loss.
    #[arg(long, allow_negative_numbers = true)]
    target: f64,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.fit).with_context(|| format!("reading {}", args.fit.display()))?;
    let fit: PowerLawFit = serde_json::from_str(&text).with_context(|| format!("parsing {}", args.fit.display()))?;
    let scale = plan_dataset_size(&fit, args.target)?;
    println!(
        "{}",
        serde_json::json!({ "target": args.target, "required_scale": scale, "required_scale_ceil": scale.ceil() })
    );
    Ok(())
}
