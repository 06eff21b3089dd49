use std::path::PathBuf;

use anyhow::Context;
use geoscale_core::labelgen::{generate_all, read_geojson, render_bundle, ChipSpec, ClassMap};

use crate::config::GlobalConfig;
use crate::output::Staged;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSON-lines file of chip specifications.
    #[arg(long)]
    chips: PathBuf,
    /// GeoJSON FeatureCollection in the chips' CRS.
    #[arg(long)]
    vectors: PathBuf,
    /// Ontology (TOML, or JSON by extension).
    #[arg(long)]
    classes: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Process chips one at a time instead of in parallel.
    #[arg(long)]
    sequential: bool,
}

pub fn run(args: Args, global: &GlobalConfig) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.chips).with_context(|| format!("reading {}", args.chips.display()))?;
    let chips = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str::<ChipSpec>(l).with_context(|| format!("{} line {}", args.chips.display(), i + 1)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let features = read_geojson(&args.vectors)?;
    let classmap = ClassMap::from_path(&args.classes)?;
    let bundles = generate_all(&chips, &features, &classmap, !args.sequential)?;

    let out = global.out_dir(args.out_dir);
    let mut staged = Staged::default();
    let mut instances = 0;
    for b in &bundles {
        instances += b.instances.len();
        for (rel, bytes) in render_bundle(b) {
            staged.add(out.join(rel), bytes);
        }
    }
    staged.commit()?;
    println!("{} chips, {} instances", bundles.len(), instances);
    Ok(())
}
