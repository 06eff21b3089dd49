use std::path::PathBuf;

use anyhow::Context;
use geoscale_core::scaling::write_points_csv;
use geoscale_core::seed::{derive_seed, stage_seed};
use geoscale_core::simulator::simulate_ensemble;
use geoscale_core::{EnsembleConfig, ScalingPoint};

use crate::config::GlobalConfig;
use crate::output::Staged;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Ensemble TOML (law, scales, trapped_fraction, total_steps, ...).
    #[arg(long)]
    config: PathBuf,
    /// Seeds per scale when the file lists none; derived from --seed.
    #[arg(long, default_value_t = 1)]
    replicas: u64,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn run(args: Args, global: &GlobalConfig) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut config: EnsembleConfig = toml::from_str(&text).with_context(|| format!("parsing {}", args.config.display()))?;
    if config.seeds.is_empty() {
        let root = stage_seed(global.seed, "simulate");
        config.seeds = (0..args.replicas.max(1)).map(|i| derive_seed(root, i)).collect();
    }
    let runs = simulate_ensemble(&config)?;

    let out = global.out_dir(args.out_dir);
    let mut staged = Staged::default();
    for r in &runs {
        staged.add(out.join(format!("{}.csv", r.point.run_id)), r.log.to_csv_string());
    }
    let points: Vec<ScalingPoint> = runs.iter().map(|r| r.point.clone()).collect();
    staged.add(out.join("points.csv"), write_points_csv(&points));
    staged.commit()?;
    println!("{} runs written to {}", runs.len(), out.display());
    Ok(())
}
