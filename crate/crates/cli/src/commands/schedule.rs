use std::path::PathBuf;

use geoscale_core::WsdSchedule;

use crate::output::Staged;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    base_lr: f64,
    #[arg(long)]
    total_steps: u64,
    #[arg(long, default_value_t = 0.1)]
    warmup: f64,
    #[arg(long, default_value_t = 0.8)]
    stable: f64,
    #[arg(long, default_value_t = 0.1)]
    decay: f64,
    /// Final rate as a fraction of the base rate.
    #[arg(long, default_value_t = 0.01)]
    floor_ratio: f64,
    /// Print every n-th step (the last step is always included).
    #[arg(long, default_value_t = 100)]
    every: u64,
    /// Write the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let schedule = WsdSchedule::new(args.base_lr, args.total_steps)?
        .with_fractions(args.warmup, args.stable, args.decay)?
        .with_floor_ratio(args.floor_ratio)?;
    let mut text = String::from("step,lr\n");
    for (step, lr) in schedule.table(args.every.max(1)) {
        text.push_str(&format!("{step},{lr:e}\n"));
    }
    match args.out {
        Some(path) => {
            let mut staged = Staged::default();
            staged.add(path, text);
            staged.commit()?;
        }
        None => print!("{text}"),
    }
    Ok(())
}
