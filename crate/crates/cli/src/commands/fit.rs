use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::ValueEnum;
use geoscale_core::scaling::{detect_trapped, fit_power_law, read_points_csv, FloorMode, ScalingMode, TrappedPolicy};
use geoscale_core::RunLog;

use crate::config::GlobalConfig;
use crate::output::Staged;
use crate::plot::scaling_svg;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Data,
    Parameter,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FloorArg {
    Free,
    Zero,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// CSV with columns run_id,scale,loss,trapped.
    #[arg(long)]
    points: PathBuf,
    #[arg(long, value_enum, default_value = "data")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "free")]
    floor: FloorArg,
    /// Directory holding `<run_id>.csv` logs; when given, trapped flags are
    /// recomputed from the logs instead of taken from the points file.
    #[arg(long)]
    runs: Option<PathBuf>,
    /// Median absolute deviations above the cohort reference for a trapped run.
    #[arg(long, default_value_t = 3.0)]
    trapped_k: f64,
    /// Final-window length for trapped detection.
    #[arg(long, default_value_t = 100)]
    trapped_window: usize,
    /// Output path (default `<output_dir>/fit.json`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot here.
    #[arg(long)]
    plot: Option<PathBuf>,
}

pub fn run(args: Args, global: &GlobalConfig) -> anyhow::Result<()> {
    let mut points = read_points_csv(&args.points)?;
    if let Some(dir) = &args.runs {
        let logs = points
            .iter()
            .map(|p| {
                let path = dir.join(format!("{}.csv", p.run_id));
                RunLog::from_path(&path).with_context(|| format!("reading {}", path.display()))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        if !(args.trapped_k >= 0.0) {
            bail!("--trapped-k must be non-negative");
        }
        let policy = TrappedPolicy {
            k: args.trapped_k,
            window: args.trapped_window,
            ..TrappedPolicy::default()
        };
        let flags = detect_trapped(&points, &logs, &policy)?;
        for (p, f) in points.iter_mut().zip(flags) {
            p.trapped = f;
        }
    }
    let mode = match args.mode {
        ModeArg::Data => ScalingMode::DataScaling,
        ModeArg::Parameter => ScalingMode::ParameterScaling,
    };
    let floor = match args.floor {
        FloorArg::Free => FloorMode::Free,
        FloorArg::Zero => FloorMode::FixedZero,
    };
    let fit = fit_power_law(&points, mode, floor)?;

    let mut staged = Staged::default();
    staged.add_json(args.out.unwrap_or_else(|| global.output_dir.join("fit.json")), &fit)?;
    if let Some(p) = args.plot {
        staged.add(p, scaling_svg(&points, &fit));
    }
    staged.commit()?;
    println!(
        "A = {}  B = {}  exponent = {}  R2 log-log = {:.4}  R2 linear = {:.4}  points = {}  excluded = {:?}",
        fit.floor, fit.coefficient, fit.exponent, fit.r_squared_loglog, fit.r_squared_linear, fit.n_points, fit.excluded
    );
    Ok(())
}
