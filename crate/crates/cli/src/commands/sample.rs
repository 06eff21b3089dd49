use std::path::PathBuf;

use anyhow::{bail, Context};
use geoscale_core::catalog::{parse_manifest, AttributeSchema};
use geoscale_core::sampler::{bins_for_schema, nested_subsets, rake, weighted_permutation};
use geoscale_core::seed::stage_seed;
use serde::Serialize;

use crate::config::GlobalConfig;
use crate::output::Staged;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSON-lines (or .csv) image manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// Attribute schema (TOML).
    #[arg(long)]
    schema: PathBuf,
    /// Strictly ascending subset sizes, comma separated.
    #[arg(long)]
    sizes: String,
    /// Quantile bins for numeric attributes without an explicit count.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report<'a> {
    records: usize,
    seed: u64,
    sizes: &'a [usize],
    iterations: usize,
    converged: bool,
    tolerance: f64,
    max_marginal_deviation: f64,
    deviation_per_attribute: serde_json::Map<String, serde_json::Value>,
    bins_per_attribute: serde_json::Map<String, serde_json::Value>,
}

pub fn run(args: Args, global: &GlobalConfig) -> anyhow::Result<()> {
    let sizes = super::parse_sizes(&args.sizes)?;
    if sizes.is_empty() {
        bail!("--sizes is empty");
    }
    let schema = AttributeSchema::from_path(&args.schema)?;
    let catalog = parse_manifest(&args.manifest, &schema)?;
    let bins = bins_for_schema(&catalog, args.bins)?;
    let weights = rake(&bins, args.tolerance, args.max_iterations)?;
    if !weights.converged {
        log::warn!(
            "raking stopped after {} cycles at deviation {:e}",
            weights.iterations_used,
            weights.max_marginal_deviation
        );
    }
    let seed = stage_seed(global.seed, "sample");
    let ordering = weighted_permutation(&weights, seed)?;
    let chain = nested_subsets(&ordering, &sizes)?;

    let out = global.out_dir(args.out_dir);
    let mut staged = Staged::default();
    for (size, subset) in chain.sizes.iter().zip(&chain.subsets) {
        let mut text = String::with_capacity(subset.len() * 16);
        for &i in subset {
            text.push_str(&catalog.records[i].id);
            text.push('\n');
        }
        staged.add(out.join(format!("subset_{size}.txt")), text);
    }
    let mut csv = String::from("id,weight\n");
    for (rec, w) in catalog.records.iter().zip(&weights.weight) {
        csv.push_str(&format!("{},{}\n", rec.id, w));
    }
    staged.add(out.join("weights.csv"), csv);
    let report = Report {
        records: catalog.len(),
        seed: global.seed,
        sizes: &chain.sizes,
        iterations: weights.iterations_used,
        converged: weights.converged,
        tolerance: args.tolerance,
        max_marginal_deviation: weights.max_marginal_deviation,
        deviation_per_attribute: weights.attribute_deviation.iter().map(|(k, v)| (k.clone(), (*v).into())).collect(),
        bins_per_attribute: bins.iter().map(|b| (b.attribute.clone(), b.bin_count().into())).collect(),
    };
    staged.add_json(out.join("raking_report.json"), &report)?;
    staged.commit().context("writing sample outputs")?;
    println!(
        "{} records, {} attributes, {} raking cycles (converged: {}), subsets {:?}",
        catalog.len(),
        bins.len(),
        weights.iterations_used,
        weights.converged,
        chain.sizes
    );
    Ok(())
}
