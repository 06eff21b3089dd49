//! Shared driver for the CLI golden pipeline.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use geoscale_core::simulator::simulate_run;
use geoscale_core::{PowerLaw, SimConfig, SimMode};

pub const BIN: &str = env!("CARGO_BIN_EXE_geoscale");

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn configs(name: &str) -> PathBuf {
    repo_root().join("configs").join(name)
}

pub fn geoscale(args: &[&str], threads: &str) -> Output {
    Command::new(BIN)
        .args(args)
        .env("GEOSCALE_THREADS", threads)
        .env_remove("RUST_LOG")
        .output()
        .expect("spawn geoscale")
}

fn ok(args: &[&str], threads: &str) -> String {
    let out = geoscale(args, threads);
    assert!(
        out.status.success(),
        "geoscale {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Writes the fixed inputs the pipeline needs beyond `configs/`.
fn write_inputs(dir: &Path) {
    std::fs::create_dir_all(dir.join("triage")).unwrap();
    std::fs::write(
        dir.join("sim.toml"),
        "scales = [5000.0, 10000.0, 50000.0, 100000.0, 500000.0, 1000000.0]\n\
         trapped_fraction = 0.34\ntotal_steps = 2000\nnoise_sigma = 0.002\n\
         [law]\na = 0.02\nb = 0.5\nexponent = 0.03\n",
    )
    .unwrap();
    let law = PowerLaw::new(0.0, 1.0, 0.03);
    let runs = [
        ("lr_1e-4", SimMode::Stable, 0.0),
        ("lr_3e-4", SimMode::Stable, 1e-3),
        ("lr_1e-3", SimMode::Divergent, 1e-4),
    ];
    for (seed, (name, mode, sigma)) in runs.into_iter().enumerate() {
        let mut c = SimConfig::new(mode, law, 1e5, 3000, seed as u64);
        c.noise_sigma = sigma;
        c.divergence_onset = Some(1000);
        std::fs::write(
            dir.join("triage").join(format!("{name}.csv")),
            simulate_run(&c).unwrap().to_csv_string(),
        )
        .unwrap();
    }
    let batch: String = [128.0, 256.0, 384.0, 512.0]
        .iter()
        .map(|b: &f64| format!("{b},{}\n", 1000.0 * (1.0 + 300.0 / b)))
        .collect();
    std::fs::write(dir.join("batch.csv"), format!("batch,steps\n{batch}")).unwrap();
}

/// Runs every subcommand into `dir` and returns their standard output keyed by step name.
pub fn run_pipeline(dir: &Path, threads: &str, sequential: bool) -> BTreeMap<String, String> {
    write_inputs(dir);
    let p = |rel: &str| dir.join(rel).to_str().unwrap().to_string();
    let c = |name: &str| configs(name).to_str().unwrap().to_string();
    let mut stdout = BTreeMap::new();

    stdout.insert(
        "simulate".into(),
        ok(
            &[
                "--seed",
                "7",
                "simulate",
                "--config",
                &p("sim.toml"),
                "--replicas",
                "2",
                "--out-dir",
                &p("sim"),
            ],
            threads,
        ),
    );
    stdout.insert(
        "fit".into(),
        ok(
            &[
                "fit",
                "--points",
                &p("sim/points.csv"),
                "--runs",
                &p("sim"),
                "--out",
                &p("fit.json"),
                "--plot",
                &p("fit.svg"),
            ],
            threads,
        ),
    );
    stdout.insert("plan".into(), ok(&["plan", "--fit", &p("fit.json"), "--target", "0.36"], threads));
    stdout.insert(
        "schedule".into(),
        ok(
            &[
                "schedule",
                "--base-lr",
                "1e-4",
                "--total-steps",
                "10000",
                "--every",
                "500",
                "--out",
                &p("schedule.csv"),
            ],
            threads,
        ),
    );
    stdout.insert(
        "triage".into(),
        ok(&["triage", "--runs", &p("triage"), "--out-dir", &p("triage_out")], threads),
    );
    stdout.insert(
        "batch".into(),
        ok(&["batch", "--points", &p("batch.csv"), "--out", &p("batch.json")], threads),
    );
    stdout.insert(
        "sample".into(),
        ok(
            &[
                "--seed",
                "7",
                "sample",
                "--manifest",
                &c("manifest_example.jsonl"),
                "--schema",
                &c("schema.toml"),
                "--sizes",
                "5,10,20",
                "--bins",
                "4",
                "--out-dir",
                &p("sample"),
            ],
            threads,
        ),
    );
    stdout.insert(
        "summarize".into(),
        ok(
            &[
                "summarize",
                "--manifest",
                &c("manifest_example.jsonl"),
                "--schema",
                &c("schema.toml"),
                "--out",
                &p("summary.csv"),
            ],
            threads,
        ),
    );
    let (chips, vectors, classes, labels) = (c("chips.jsonl"), c("area.geojson"), c("ontology.toml"), p("labels"));
    let mut label = vec![
        "label",
        "--chips",
        &chips,
        "--vectors",
        &vectors,
        "--classes",
        &classes,
        "--out-dir",
        &labels,
    ];
    if sequential {
        label.push("--sequential");
    }
    stdout.insert("label".into(), ok(&label, threads));
    // paths differ between runs; everything else must not
    let prefix = dir.to_str().unwrap();
    stdout.values_mut().for_each(|s| *s = s.replace(prefix, "<out>"));
    stdout
}

/// Every file under `dir`, keyed by its relative path.
pub fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Outputs small enough to keep as checked-in golden files.
pub fn is_golden(rel: &str) -> bool {
    !rel.ends_with(".pgm") && !rel.ends_with(".rle.json") && !(rel.starts_with("sim/N") || rel.starts_with("triage/"))
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// First mismatch between two trees, if any.
pub fn diff_trees(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) -> Option<String> {
    if a.keys().ne(b.keys()) {
        return Some(format!(
            "file sets differ: {:?} vs {:?}",
            a.keys().collect::<Vec<_>>(),
            b.keys().collect::<Vec<_>>()
        ));
    }
    a.iter().find(|(k, v)| b[*k] != **v).map(|(k, _)| format!("{k} differs"))
}
