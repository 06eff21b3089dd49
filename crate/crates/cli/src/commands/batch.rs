use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use geoscale_core::scaling::{fit_batch_tradeoff, steps_to_target};
use geoscale_core::RunLog;
use serde::Deserialize;

use crate::output::Staged;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// CSV with columns batch,steps.
    #[arg(long, required_unless_present = "runs_index", conflicts_with = "runs_index")]
    points: Option<PathBuf>,
    /// CSV with columns batch,log; log paths are relative to the index file.
    #[arg(long, requires = "target")]
    runs_index: Option<PathBuf>,
    /// Target loss for steps-to-target (with --runs-index).
    #[arg(long)]
    target: Option<f64>,
    /// Trailing median window for steps-to-target.
    #[arg(long, default_value_t = 50)]
    window: usize,
    /// Write the fit as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct PointRow {
    batch: f64,
    steps: f64,
}

#[derive(Deserialize)]
struct IndexRow {
    batch: f64,
    log: PathBuf,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    rdr.deserialize()
        .map(|r| r.with_context(|| format!("parsing {}", path.display())))
        .collect()
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let points: Vec<(f64, f64)> = if let Some(p) = &args.points {
        read_rows::<PointRow>(p)?.into_iter().map(|r| (r.batch, r.steps)).collect()
    } else {
        let index = args.runs_index.as_ref().expect("clap enforces one input");
        let target = args.target.expect("clap enforces --target");
        let base = index.parent().unwrap_or(Path::new("."));
        let mut pts = Vec::new();
        for row in read_rows::<IndexRow>(index)? {
            let path = base.join(&row.log);
            let log = RunLog::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
            match steps_to_target(&log, target, args.window) {
                Some(s) => pts.push((row.batch, s as f64)),
                None => bail!("{} never reaches loss {target}", path.display()),
            }
        }
        pts
    };
    let fit = fit_batch_tradeoff(&points)?;
    if let Some(out) = args.out {
        let mut staged = Staged::default();
        staged.add_json(out, &fit)?;
        staged.commit()?;
    }
    println!(
        "s_min = {}  b_crit = {}  R2 = {:.4}{}",
        fit.s_min,
        fit.b_crit,
        fit.r_squared,
        if fit.below_tested_range {
            "  (critical batch below tested range)"
        } else {
            ""
        }
    );
    Ok(())
}
