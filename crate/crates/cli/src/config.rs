use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

/// Defaults file for the global options. Flags win over file values.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GlobalFile {
    seed: Option<u64>,
    log_level: Option<String>,
    threads: Option<usize>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct GlobalConfig {
    pub seed: u64,
    pub log_level: log::LevelFilter,
    /// `None` leaves the rayon default.
    pub threads: Option<usize>,
    /// Fallback for subcommands whose `--out-dir` is omitted.
    pub output_dir: PathBuf,
}

impl GlobalConfig {
    pub fn resolve(file: Option<&Path>, seed: Option<u64>, threads: Option<usize>, log_level: Option<&str>) -> anyhow::Result<Self> {
        let f: GlobalFile = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => GlobalFile::default(),
        };
        let env_threads = match std::env::var("GEOSCALE_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(v.trim().parse::<usize>().context("GEOSCALE_THREADS must be a positive integer")?),
            _ => None,
        };
        let threads = threads.or(env_threads).or(f.threads);
        if threads == Some(0) {
            bail!("thread count must be at least 1");
        }
        let level = log_level.map(str::to_string).or(f.log_level).unwrap_or_else(|| "warn".into());
        let log_level = level.parse().with_context(|| format!("unknown log level {level:?}"))?;
        Ok(Self {
            seed: seed.or(f.seed).unwrap_or(0),
            log_level,
            threads,
            output_dir: f.output_dir.unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    pub fn init_logging(&self) {
        let _ = env_logger::Builder::new()
            .filter_level(self.log_level)
            .format_timestamp(None)
            .try_init();
    }

    pub fn init_threads(&self) -> anyhow::Result<()> {
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring thread pool")?;
        }
        Ok(())
    }

    pub fn out_dir(&self, flag: Option<PathBuf>) -> PathBuf {
        flag.unwrap_or_else(|| self.output_dir.clone())
    }
}
