//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use geoscale_core::catalog::{AttributeSchema, AttributeSpec, Catalog, ImageRecord};
use geoscale_core::labelgen::{convex_hull, rasterize_mask, rotated_bbox};
use geoscale_core::runlog::RunLog;
use geoscale_core::sampler::{bins_for_schema, marginal_deviation, nested_subsets, rake, weighted_permutation, BinAssignment};
use geoscale_core::scaling::{
    detect_trapped, fit_batch_tradeoff, fit_power_law, plan_dataset_size, FloorMode, PowerLawFit, ScalingMode, ScalingPoint, TrappedPolicy,
};
use geoscale_core::schedule::{triage, TriagePolicy};
use geoscale_core::simulator::{simulate_ensemble, simulate_run};
use geoscale_core::{EnsembleConfig, PowerLaw, SimConfig, SimMode, WsdSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! check {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(elapsed: Duration, limit_s: f64) -> Outcome {
    check!(elapsed.as_secs_f64() < limit_s, "took {:.2?}, limit {limit_s} s", elapsed);
    Ok(format!("{:.2?}", elapsed))
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn points_and_logs(e: &EnsembleConfig) -> (Vec<ScalingPoint>, Vec<RunLog>) {
    let runs = simulate_ensemble(e).expect("ensemble");
    (
        runs.iter().map(|r| r.point.clone()).collect(),
        runs.into_iter().map(|r| r.log).collect(),
    )
}

fn c1_power_law_recovery() -> Outcome {
    let t = Instant::now();
    let e = EnsembleConfig::new(PowerLaw::new(0.02, 0.5, 0.03), vec![5e3, 1e4, 1e5, 1e6], 0.0, vec![1], 2000);
    let (points, _) = points_and_logs(&e);
    let fit = fit_power_law(&points, ScalingMode::DataScaling, FloorMode::Free).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let errs = [rel(fit.floor, 0.02), rel(fit.coefficient, 0.5), rel(fit.exponent, 0.03)];
    check!(errs.iter().all(|&r| r <= 1e-3), "relative errors (A, B, a) = {errs:?}");
    let time = within(elapsed, 1.0)?;
    Ok(format!(
        "A={:.6} B={:.6} a={:.6}, max rel err {:.1e}, {time}",
        fit.floor,
        fit.coefficient,
        fit.exponent,
        errs.iter().cloned().fold(0.0, f64::max)
    ))
}

fn c2_trapped_exclusion() -> Outcome {
    let e = EnsembleConfig::new(
        PowerLaw::new(0.02, 0.5, 0.03),
        vec![5e3, 1e4, 5e4, 1e5, 5e5, 1e6],
        0.5,
        vec![1],
        4000,
    );
    let (points, logs) = points_and_logs(&e);
    let truth: Vec<bool> = points.iter().map(|p| p.trapped).collect();
    let flags = detect_trapped(&points, &logs, &TrappedPolicy::default()).map_err(|e| e.to_string())?;
    check!(flags == truth, "flags {flags:?} truth {truth:?}");

    let mut all = points.clone();
    all.iter_mut().for_each(|p| p.trapped = false);
    let r2_all = fit_power_law(&all, ScalingMode::DataScaling, FloorMode::FixedZero)
        .map_err(|e| e.to_string())?
        .r_squared_loglog;
    let mut kept = points;
    kept.iter_mut().zip(&flags).for_each(|(p, &f)| p.trapped = f);
    let r2_kept = fit_power_law(&kept, ScalingMode::DataScaling, FloorMode::FixedZero)
        .map_err(|e| e.to_string())?
        .r_squared_loglog;
    check!(r2_all < 0.5 && r2_kept > 0.9, "R2 all {r2_all:.3}, after exclusion {r2_kept:.3}");
    Ok(format!("labels exact, R2 {r2_all:.3} -> {r2_kept:.3}"))
}

fn c3_planner_inversion() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let fit = PowerLawFit {
            floor: rng.random_range(0.0..0.5),
            coefficient: rng.random_range(0.1..5.0),
            exponent: rng.random_range(0.01..1.0),
            r_squared_loglog: 1.0,
            r_squared_linear: 1.0,
            excluded: vec![],
            mode: ScalingMode::DataScaling,
            floor_mode: FloorMode::Free,
            n_points: 3,
        };
        let n = 10f64.powf(rng.random_range(2.0..8.0));
        let planned = plan_dataset_size(&fit, fit.floor + fit.coefficient * n.powf(-fit.exponent)).map_err(|e| e.to_string())?;
        worst = worst.max(rel(planned, n));
    }
    check!(worst <= 1e-9, "worst relative error {worst:.3e}");
    let time = within(t.elapsed(), 1.0)?;
    Ok(format!("worst rel err {worst:.1e}, {time}"))
}

fn c4_wsd() -> Outcome {
    let base = 1e-4;
    let s = WsdSchedule::new(base, 10_000)
        .and_then(|s| s.with_fractions(0.1, 0.8, 0.1))
        .and_then(|s| s.with_floor_ratio(0.01))
        .map_err(|e| e.to_string())?;
    let lr = |t| s.lr_at(t).unwrap();
    let tol = 1e-12 * base;
    for (step, want) in [(500, 5e-5), (5000, 1e-4), (10_000, 1e-6)] {
        check!((lr(step) - want).abs() <= tol, "lr({step}) = {:e}, want {want:e}", lr(step));
    }
    // both segments meet the plateau value at their shared boundary
    check!(
        s.warmup_end() == 1000.0 && s.decay_start() == 9000.0,
        "boundaries {} {}",
        s.warmup_end(),
        s.decay_start()
    );
    for b in [1000, 9000] {
        check!((lr(b) - base).abs() <= tol, "lr({b}) = {:e}", lr(b));
    }
    let jump = (lr(1001) - lr(1000)).abs().max((lr(9001) - lr(9000)).abs());
    check!(jump <= base * (100f64.ln() / 1000.0) * 1.0001, "step change {jump:e} at a boundary");
    Ok("lr(500)=5e-5 lr(5000)=1e-4 lr(10000)=1e-6, boundaries continuous".into())
}

fn c5_triage() -> Outcome {
    let law = PowerLaw::new(0.0, 1.0, 0.03);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut caught = 0;
    let mut latest = 0;
    for trial in 0..100u64 {
        let onset = rng.random_range(100..=1500);
        let mut c = SimConfig::new(SimMode::Divergent, law, 10f64.powf(rng.random_range(3.0..7.0)), 10_000, trial);
        c.divergence_onset = Some(onset);
        c.noise_sigma = 1e-4;
        let v = triage(&simulate_run(&c).unwrap(), &TriagePolicy::default()).map_err(|e| e.to_string())?;
        if let Some(step) = v.fail_step.filter(|&s| s > onset && s < 2000) {
            caught += 1;
            latest = latest.max(step);
        }
    }
    let mut false_alarms = 0;
    for trial in 0..100u64 {
        let total = rng.random_range(2000..=10_000);
        let c = SimConfig::new(SimMode::Stable, law, 10f64.powf(rng.random_range(3.0..7.0)), total, trial);
        if !triage(&simulate_run(&c).unwrap(), &TriagePolicy::default())
            .map_err(|e| e.to_string())?
            .passed()
        {
            false_alarms += 1;
        }
    }
    check!(
        caught >= 99 && false_alarms == 0,
        "divergent caught {caught}/100, stable flagged {false_alarms}/100"
    );
    Ok(format!(
        "divergent caught {caught}/100 (latest step {latest}), stable flagged 0/100"
    ))
}

fn c6_batch() -> Outcome {
    let (s_min, b_crit) = (1200.0, 300.0);
    let pts: Vec<(f64, f64)> = [128.0, 256.0, 384.0, 512.0]
        .iter()
        .map(|&b| (b, s_min * (1.0 + b_crit / b)))
        .collect();
    let fit = fit_batch_tradeoff(&pts).map_err(|e| e.to_string())?;
    check!(
        rel(fit.s_min, s_min) < 1e-9 && rel(fit.b_crit, b_crit) < 1e-9,
        "got s_min {} b_crit {}",
        fit.s_min,
        fit.b_crit
    );
    check!(!fit.below_tested_range, "flag set on hyperbolic data");
    let flat: Vec<(f64, f64)> = [128.0, 256.0, 384.0, 512.0].iter().map(|&b| (b, 5000.0)).collect();
    let f = fit_batch_tradeoff(&flat).map_err(|e| e.to_string())?;
    check!(f.below_tested_range, "constant steps did not set the flag (b_crit {})", f.b_crit);
    Ok(format!("s_min={} b_crit={}, constant input flagged", fit.s_min, fit.b_crit))
}

/// Cell-level IPF over the joint table, normalized after each cycle.
fn ipf_oracle(bins: &[BinAssignment], cycles: usize) -> Vec<f64> {
    let n = bins[0].bin_of_record.len();
    let mut cells: BTreeMap<Vec<usize>, (f64, Vec<usize>)> = BTreeMap::new();
    for r in 0..n {
        let e = cells
            .entry(bins.iter().map(|b| b.bin_of_record[r]).collect())
            .or_insert((0.0, Vec::new()));
        e.0 += 1.0 / n as f64;
        e.1.push(r);
    }
    for _ in 0..cycles {
        for (a, b) in bins.iter().enumerate() {
            let mut mass = vec![0.0; b.bin_count()];
            for (key, (m, _)) in &cells {
                mass[key[a]] += *m;
            }
            let target = 1.0 / mass.iter().filter(|&&m| m > 0.0).count() as f64;
            for (key, (m, _)) in cells.iter_mut() {
                *m *= target / mass[key[a]];
            }
        }
        let total: f64 = cells.values().map(|c| c.0).sum();
        cells.values_mut().for_each(|c| c.0 /= total);
    }
    let mut w = vec![0.0; n];
    for (m, members) in cells.values() {
        members.iter().for_each(|&r| w[r] = m / members.len() as f64);
    }
    w
}

fn c7_raking() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_dev, mut worst_diff, mut max_cycles) = (0.0f64, 0.0f64, 0);
    for case in 0..1000 {
        let dims: Vec<usize> = (0..rng.random_range(1..=4)).map(|_| rng.random_range(2..=8)).collect();
        let cells: usize = dims.iter().product();
        // full factorial with uneven multiplicities: every cell occupied, so uniform marginals are attainable
        let mut idx: Vec<Vec<usize>> = vec![Vec::new(); dims.len()];
        for cell in 0..cells {
            let mut rest = cell;
            let key: Vec<usize> = dims
                .iter()
                .map(|&k| {
                    let v = rest % k;
                    rest /= k;
                    v
                })
                .collect();
            for _ in 0..rng.random_range(1..=5) {
                key.iter().enumerate().for_each(|(a, &v)| idx[a].push(v));
            }
        }
        let bins: Vec<BinAssignment> = idx
            .into_iter()
            .zip(&dims)
            .enumerate()
            .map(|(a, (v, &k))| BinAssignment::from_indices(&format!("a{a}"), k, v))
            .collect();
        let w = rake(&bins, 1e-6, 10_000).map_err(|e| e.to_string())?;
        check!(w.converged, "case {case} did not converge");
        for b in &bins {
            worst_dev = worst_dev.max(marginal_deviation(b, &w.weight));
        }
        let oracle = ipf_oracle(&bins, w.iterations_used);
        worst_diff = w.weight.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(worst_diff, f64::max);
        max_cycles = max_cycles.max(w.iterations_used);
    }
    check!(
        worst_dev <= 1e-6 && worst_diff <= 1e-9,
        "max marginal L1 {worst_dev:.2e}, max oracle diff {worst_diff:.2e}"
    );
    let time = within(t.elapsed(), 30.0)?;
    Ok(format!(
        "1000 catalogs, max L1 {worst_dev:.1e}, max oracle diff {worst_diff:.1e}, max cycles {max_cycles}, {time}"
    ))
}

fn c8_nesting() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sensors = ["pan", "msi", "sar"];
    let records: Vec<ImageRecord> = (0..10_000)
        .map(|i| ImageRecord {
            id: format!("IMG_{i:05}"),
            center_lon: rng.random_range(-180.0..180.0),
            center_lat: rng.random_range(-80.0..80.0),
            acquisition_time: Utc.timestamp_opt(1_400_000_000 + rng.random_range(0..300_000_000), 0).unwrap(),
            numeric_attrs: BTreeMap::from([
                ("gsd_m".to_string(), rng.random_range(0.3..1.2)),
                ("off_nadir_deg".to_string(), rng.random_range(0.0f64..40.0).powi(2) / 40.0),
            ]),
            categorical_attrs: BTreeMap::from([("sensor".to_string(), sensors[rng.random_range(0..3)].to_string())]),
            extra: BTreeMap::new(),
        })
        .collect();
    let schema = AttributeSchema::new(vec![
        AttributeSpec::numeric("gsd_m"),
        AttributeSpec::numeric("off_nadir_deg"),
        AttributeSpec::categorical("sensor"),
    ])
    .map_err(|e| e.to_string())?;
    let catalog = Catalog::new(records, schema).map_err(|e| e.to_string())?;
    let bins = bins_for_schema(&catalog, 10).map_err(|e| e.to_string())?;
    let weights = rake(&bins, 1e-6, 1000).map_err(|e| e.to_string())?;
    let seeds = 20;
    for seed in 0..seeds {
        let order = weighted_permutation(&weights, seed).map_err(|e| e.to_string())?;
        let chain = nested_subsets(&order, &[500, 1000, 5000]).map_err(|e| e.to_string())?;
        for pair in chain.subsets.windows(2) {
            let outer: HashSet<usize> = pair[1].iter().copied().collect();
            check!(
                pair[0].iter().all(|i| outer.contains(i)),
                "seed {seed}: subset of {} not inside {}",
                pair[0].len(),
                pair[1].len()
            );
        }
        let distinct: HashSet<usize> = chain.subsets[2].iter().copied().collect();
        check!(distinct.len() == 5000, "seed {seed}: repeated records");
    }
    Ok(format!("{seeds} seeds, sizes 500 < 1000 < 5000, every element checked"))
}

fn pnpoly(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let ((xi, yi), (xj, yj)) = (poly[i], poly[j]);
        if ((yi > y) != (yj > y)) && (x < (xj - xi) * (y - yi) / (yj - yi) + xi) {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn c9_raster() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..100 {
        // star-shaped about its centre, hence simple
        let (cx, cy) = (rng.random_range(10.0..54.0), rng.random_range(10.0..54.0));
        let mut angles: Vec<f64> = (0..rng.random_range(3..16))
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let on_grid = case % 4 == 0;
        let poly: Vec<(f64, f64)> = angles
            .iter()
            .map(|a| {
                let r = rng.random_range(2.0..30.0);
                let p = (cx + r * a.cos(), cy + r * a.sin());
                if on_grid {
                    (p.0.floor() + 0.5, p.1.floor() + 0.5)
                } else {
                    p
                }
            })
            .collect();
        let mask = rasterize_mask(&poly, 64, 64).map_err(|e| e.to_string())?;
        for r in 0..64 {
            for c in 0..64 {
                let want = pnpoly(&poly, c as f64 + 0.5, r as f64 + 0.5);
                check!((mask.get(r, c) == 1) == want, "case {case} pixel ({r}, {c})");
            }
        }
    }
    let time = within(t.elapsed(), 10.0)?;
    Ok(format!("100 polygons, 409600 pixels identical, {time}"))
}

fn sweep_area(points: &[(f64, f64)]) -> f64 {
    (0..1800)
        .map(|k| {
            let (s, c) = (k as f64 * 0.1).to_radians().sin_cos();
            let span = |f: &dyn Fn(&(f64, f64)) -> f64| {
                let v: Vec<f64> = points.iter().map(f).collect();
                v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
            };
            span(&|p| p.0 * c + p.1 * s) * span(&|p| -p.0 * s + p.1 * c)
        })
        .fold(f64::INFINITY, f64::min)
}

fn c10_rotated_boxes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_gap = f64::NEG_INFINITY;
    for case in 0..50 {
        let pts: Vec<(f64, f64)> = (0..rng.random_range(3..25))
            .map(|_| (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
            .collect();
        let hull = convex_hull(&pts);
        let b = rotated_bbox(&hull);
        let sweep = sweep_area(&hull);
        check!(b.area() <= sweep + 1e-6, "case {case}: calipers {} > sweep {sweep}", b.area());
        worst_gap = worst_gap.max(b.area() - sweep);
    }
    for _ in 0..20 {
        let (x0, y0) = (rng.random_range(0.0..50.0), rng.random_range(0.0..50.0));
        let h = rng.random_range(1.0..20.0);
        let w = h + rng.random_range(0.5..20.0);
        let rect = [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h)];
        let b = rotated_bbox(&rect);
        let same = (b.cx - (x0 + w / 2.0)).abs() < 1e-9
            && (b.cy - (y0 + h / 2.0)).abs() < 1e-9
            && (b.w - w).abs() < 1e-9
            && (b.h - h).abs() < 1e-9;
        check!(same && b.theta_deg == 0.0, "rectangle {rect:?} gave {b:?}");
    }
    Ok(format!(
        "50 hulls, calipers minus sweep at most {worst_gap:.2e}; 20 rectangles returned with theta 0"
    ))
}

fn c11_determinism() -> Outcome {
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let modes = [("1", true), ("1", true), ("4", false)];
    let mut stdouts = Vec::new();
    let mut trees = Vec::new();
    for (d, (threads, sequential)) in dirs.iter().zip(modes) {
        stdouts.push(common::run_pipeline(d.path(), threads, sequential));
        trees.push(common::tree(d.path()));
    }
    for k in 1..3 {
        check!(stdouts[0] == stdouts[k], "stdout differs between run 0 and run {k}");
        if let Some(d) = common::diff_trees(&trees[0], &trees[k]) {
            return Err(format!("run 0 vs run {k}: {d}"));
        }
    }
    let golden = common::tree(&common::golden_dir());
    let produced = trees[0].iter().filter(|(k, _)| common::is_golden(k));
    for (rel, bytes) in produced {
        check!(golden.get(rel) == Some(bytes), "{rel} differs from the golden copy");
    }
    let bytes: usize = trees[0].values().map(Vec::len).sum();
    Ok(format!(
        "{} files ({bytes} bytes) identical across repeat and 1 vs 4 threads, sequential vs parallel labels",
        trees[0].len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("power-law recovery", c1_power_law_recovery),
        ("trapped-run exclusion", c2_trapped_exclusion),
        ("planner inversion", c3_planner_inversion),
        ("WSD schedule values", c4_wsd),
        ("fail-fast triage", c5_triage),
        ("batch tradeoff", c6_batch),
        ("raking vs cell IPF", c7_raking),
        ("subset nesting", c8_nesting),
        ("rasterization vs point-in-polygon", c9_raster),
        ("rotated boxes vs angle sweep", c10_rotated_boxes),
        ("CLI determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
