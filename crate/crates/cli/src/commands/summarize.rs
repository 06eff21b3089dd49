use std::path::PathBuf;

use geoscale_core::catalog::{parse_manifest, summarize, AttributeSchema};

use crate::output::Staged;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// Long-format CSV destination; a JSON summary is printed either way.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let schema = AttributeSchema::from_path(&args.schema)?;
    let catalog = parse_manifest(&args.manifest, &schema)?;
    let summary = summarize(&catalog)?;
    if let Some(path) = args.out {
        let mut staged = Staged::default();
        staged.add(path, summary.to_csv());
        staged.commit()?;
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
