//! End-to-end acceptance checks. Every criterion runs in one sequential test
//! so that the wall-clock limits are measured without competing tests.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use depthrank::depth::{halfspace_depth, DepthSpec};
use depthrank::model::{sample, Family, GaussianMixture, RngStream};
use depthrank::powerlab::{
    analytic_table, mc_power, reproduce_with_seed, Budget, PowerGrid, SimPlan, Target, TestKind, DEFAULT_SEED,
};
use depthrank::ranksum::{q_statistic, variance_estimates, RankCounts};
use depthrank::theory::{asymptotic_sigmas, q_location_scale};
use depthrank::{RankTransform, Sample};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const TABLE1_T2: [[f64; 6]; 2] = [
    [0.050, 0.117, 0.155, 0.196, 0.239, 0.284],
    [0.050, 0.193, 0.273, 0.357, 0.441, 0.521],
];
const TABLE2_T2: [[f64; 6]; 2] = [
    [0.050, 0.050, 0.052, 0.054, 0.056, 0.059],
    [0.050, 0.051, 0.054, 0.058, 0.063, 0.068],
];
const TABLE2_Q: [[f64; 6]; 2] = [
    [0.051, 0.181, 0.430, 0.734, 0.891, 0.963],
    [0.051, 0.299, 0.740, 0.950, 0.994, 1.000],
];
const TABLE3_T2: [[f64; 6]; 2] = [
    [0.050, 0.219, 0.348, 0.493, 0.634, 0.755],
    [0.050, 0.404, 0.625, 0.805, 0.916, 0.970],
];
const TABLE3_Q: [[f64; 6]; 2] = [
    [0.051, 0.437, 0.662, 0.839, 0.941, 0.983],
    [0.049, 0.725, 0.922, 0.987, 0.999, 1.000],
];
const SMALL_SAMPLE_T2: [(Family, [f64; 6]); 3] = [
    (Family::ContaminatedLocation, [0.058, 0.083, 0.108, 0.142, 0.151, 0.189]),
    (Family::ContaminatedScale, [0.059, 0.063, 0.059, 0.073, 0.061, 0.067]),
    (Family::LocationScale, [0.069, 0.113, 0.147, 0.183, 0.220, 0.269]),
];
const SMALL_SAMPLE_Q: [(Family, [f64; 6]); 3] = [
    (Family::ContaminatedLocation, [0.057, 0.154, 0.156, 0.170, 0.203, 0.216]),
    (Family::ContaminatedScale, [0.063, 0.145, 0.243, 0.377, 0.469, 0.581]),
    (Family::LocationScale, [0.060, 0.245, 0.324, 0.418, 0.498, 0.587]),
];

/// Compares a grid row against printed values; returns the misses.
fn compare_row(grid: &PowerGrid, family: Family, n: usize, method: &str, printed: &[f64; 6], tol: f64) -> Vec<String> {
    let row = grid.row(family, n, method);
    assert_eq!(row.len(), 6, "{family} n={n} {method}");
    row.iter()
        .zip(printed)
        .filter_map(|(cell, &want)| {
            let got = cell.power.expect("power present");
            ((got - want).abs() > tol).then(|| {
                format!("{family} n={n} {method} at {}: {got:.3} vs {want:.3}", cell.param)
            })
        })
        .collect()
}

fn rows_outcome(misses: Vec<String>, total: usize) -> Outcome {
    if misses.is_empty() {
        outcome(true, format!("{total} cells within tolerance"))
    } else {
        outcome(false, format!("{} of {total} cells outside tolerance: {}", misses.len(), misses.join("; ")))
    }
}

fn analytic_t2_rows() -> Outcome {
    let mut misses = Vec::new();
    for (target, family, printed) in [
        (Target::Table1, Family::ContaminatedLocation, TABLE1_T2),
        (Target::Table2, Family::ContaminatedScale, TABLE2_T2),
        (Target::Table3, Family::LocationScale, TABLE3_T2),
    ] {
        let grid = analytic_table(target).unwrap();
        for (k, n) in [100, 200].into_iter().enumerate() {
            misses.extend(compare_row(&grid, family, n, "T2", &printed[k], 0.005));
        }
    }
    rows_outcome(misses, 24)
}

fn analytic_q_rows() -> Outcome {
    let mut misses = Vec::new();
    for (target, family, printed) in [
        (Target::Table2, Family::ContaminatedScale, TABLE2_Q),
        (Target::Table3, Family::LocationScale, TABLE3_Q),
    ] {
        let grid = analytic_table(target).unwrap();
        for (k, n) in [100, 200].into_iter().enumerate() {
            misses.extend(compare_row(&grid, family, n, "Q", &printed[k], 0.02));
        }
    }
    rows_outcome(misses, 24)
}

fn location_scale_normal(u: f64, s2: f64) -> GaussianMixture {
    GaussianMixture::normal(vec![u, u], depthrank::SquareMatrix::scaled_identity(2, s2)).unwrap()
}

fn closed_form_vs_empirical() -> Outcome {
    let f = GaussianMixture::standard(2);
    let spec = DepthSpec::mahalanobis();
    let mut worst = 0.0f64;
    for u in [0.0, 0.25, 0.5] {
        for s2 in [0.5, 1.0, 2.0] {
            let g = location_scale_normal(u, s2);
            let mean = (0..5u64)
                .map(|seed| {
                    let mut rng = RngStream::new(1000 + seed, 0);
                    let x = sample(&f, 4000, &mut rng).unwrap();
                    let y = sample(&g, 4000, &mut rng).unwrap();
                    q_statistic(&x, &y, &spec).unwrap()
                })
                .sum::<f64>()
                / 5.0;
            worst = worst.max((mean - q_location_scale(u, s2)).abs());
        }
    }
    outcome(worst <= 0.015, format!("largest |closed form - empirical| = {worst:.5}"))
}

fn null_calibration() -> Outcome {
    let f = GaussianMixture::standard(2);
    let mut lines = Vec::new();
    let mut pass = true;
    let mut check = |label: &str, plan: SimPlan, hi: f64| {
        let est = mc_power(&plan).unwrap();
        let ok = (0.03..=hi).contains(&est.rate);
        pass &= ok;
        lines.push(format!("{label} {:.4}{}", est.rate, if ok { "" } else { " (out of range)" }));
    };
    for (k, (label, spec)) in [
        ("Q/mahalanobis", DepthSpec::mahalanobis()),
        ("Q/halfspace", DepthSpec::halfspace()),
        ("Q/projection", DepthSpec::projection()),
    ]
    .into_iter()
    .enumerate()
    {
        let plan = SimPlan::new(TestKind::Q, f.clone(), f.clone(), 100, 100)
            .with_depth(spec)
            .with_replications(2000)
            .with_seed(500 + k as u64);
        check(label, plan, 0.07);
    }
    let t2 = SimPlan::new(TestKind::T2, f.clone(), f.clone(), 100, 100).with_replications(2000).with_seed(510);
    check("T2", t2, 0.07);
    let oja = SimPlan::new(TestKind::Oja, f.clone(), f.clone(), 30, 30).with_replications(1000).with_seed(520);
    check("Oja", oja, 0.08);
    outcome(pass, lines.join(", "))
}

fn small_sample_table() -> Outcome {
    let grid = reproduce_with_seed(Target::Table4, Budget::Paper, DEFAULT_SEED).unwrap();
    let mut misses = Vec::new();
    for (family, printed) in SMALL_SAMPLE_Q {
        misses.extend(compare_row(&grid, family, 25, "Q", &printed, 0.05));
    }
    for (family, printed) in SMALL_SAMPLE_T2 {
        misses.extend(compare_row(&grid, family, 25, "T2", &printed, 0.03));
    }
    rows_outcome(misses, 36)
}

/// Smallest closed-halfspace count over candidate directions.
fn brute_force_halfspace(x: &[f64], reference: &Sample) -> usize {
    let count = |theta: f64| {
        let (c, s) = (theta.cos(), theta.sin());
        reference.rows().filter(|p| c * (p[0] - x[0]) + s * (p[1] - x[1]) >= 0.0).count()
    };
    let mut critical: Vec<f64> = reference
        .rows()
        .filter(|p| p[0] != x[0] || p[1] != x[1])
        .flat_map(|p| {
            let a = (p[1] - x[1]).atan2(p[0] - x[0]);
            [(a + PI / 2.0).rem_euclid(2.0 * PI), (a - PI / 2.0).rem_euclid(2.0 * PI)]
        })
        .collect();
    critical.sort_by(f64::total_cmp);
    let mut candidates: Vec<f64> = (0..3600).map(|k| k as f64 * 2.0 * PI / 3600.0).collect();
    candidates.extend(critical.iter().copied());
    for (k, a) in critical.iter().enumerate() {
        let b = if k + 1 < critical.len() { critical[k + 1] } else { critical[0] + 2.0 * PI };
        if b > *a {
            candidates.push(0.5 * (a + b));
        }
    }
    candidates.into_iter().map(count).min().unwrap_or(reference.len())
}

fn halfspace_exactness() -> Outcome {
    let spec = DepthSpec::halfspace();
    let mut rng = RngStream::new(6, 0);
    let mut mismatches = 0;
    for config in 0..200 {
        let n = 3 + (rng.uniform() * 28.0) as usize;
        let lattice = config % 4 == 0;
        let draw = |rng: &mut RngStream| {
            if lattice {
                (rng.uniform() * 7.0).floor() - 3.0
            } else {
                rng.standard_normal()
            }
        };
        let rows: Vec<[f64; 2]> = (0..n).map(|_| [draw(&mut rng), draw(&mut rng)]).collect();
        let reference = Sample::from_rows(&rows).unwrap();
        let x = if config % 3 == 0 { rows[0].to_vec() } else { vec![draw(&mut rng), draw(&mut rng)] };
        let exact = (halfspace_depth(&x, &reference, &spec).unwrap() * n as f64).round() as usize;
        if exact != brute_force_halfspace(&x, &reference) {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches} of 200 integer counts differ"))
}

fn projection_exactness() -> Outcome {
    let mut rng = RngStream::new(7, 0);
    let mut gaps = Vec::new();
    for config in 0..100u64 {
        let n = 4 + (rng.uniform() * 22.0) as usize;
        let rows: Vec<[f64; 2]> = (0..n).map(|_| [rng.standard_normal(), rng.standard_normal()]).collect();
        let reference = Sample::from_rows(&rows).unwrap();
        let x = [rng.standard_normal() * 1.5, rng.standard_normal() * 1.5];
        let exact = DepthSpec::projection().fit(&reference).unwrap();
        let sampled = DepthSpec::projection().approximate(10_000).with_seed(config).fit(&reference).unwrap();
        let (Some(o_exact), Some(o_sampled)) = (exact.outlyingness(&x), sampled.outlyingness(&x)) else {
            return outcome(false, "outlyingness unavailable");
        };
        gaps.push(o_exact - o_sampled);
    }
    let negative = gaps.iter().filter(|g| **g < 0.0).count();
    gaps.sort_by(f64::total_cmp);
    let median = 0.5 * (gaps[49] + gaps[50]);
    outcome(
        negative == 0 && median < 1e-3,
        format!("median outlyingness gap {median:.2e}, min {:.2e}, {negative} negative", gaps[0]),
    )
}

fn wilcoxon_identity() -> Outcome {
    let mut rng = RngStream::new(8, 0);
    let mut mismatches = 0;
    for _ in 0..100 {
        let m = 2 + (rng.uniform() * 40.0) as usize;
        let n = 2 + (rng.uniform() * 40.0) as usize;
        let xs: Vec<f64> = (0..m).map(|_| rng.standard_normal()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.standard_normal() + 0.3).collect();
        let brute = xs.iter().flat_map(|x| ys.iter().map(move |y| (x <= y) as u64)).sum::<u64>();
        let counts = RankCounts::compute(
            &Sample::from_values(&xs).unwrap(),
            &Sample::from_values(&ys).unwrap(),
            &DepthSpec::cdf1d(),
        )
        .unwrap();
        let q = counts.q();
        if counts.pair_count() != brute || (q * (m * n) as f64).round() as u64 != brute {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches} of 100 instances differ"))
}

fn variance_sanity() -> Outcome {
    let f = GaussianMixture::standard(2);
    let mut rng = RngStream::new(9, 0);
    let x = sample(&f, 2000, &mut rng).unwrap();
    let y = sample(&f, 2000, &mut rng).unwrap();
    let (gf, fg) = variance_estimates(&x, &y, &DepthSpec::mahalanobis()).unwrap();
    let (agf, afg) = asymptotic_sigmas(&f).unwrap();
    let twelfth = 1.0 / 12.0;
    let pass = (gf - twelfth).abs() <= 0.01
        && (fg - twelfth).abs() <= 0.01
        && (agf - twelfth).abs() <= 1e-6
        && (afg - twelfth).abs() <= 1e-6;
    outcome(
        pass,
        format!("plug-in ({gf:.5}, {fg:.5}), analytic ({:.2e}, {:.2e}) from 1/12", agf - twelfth, afg - twelfth),
    )
}

fn uniform_ranks() -> Outcome {
    let f = GaussianMixture::standard(2);
    let mut rng = RngStream::new(10, 0);
    let x = sample(&f, 2000, &mut rng).unwrap();
    let y = sample(&f, 10_000, &mut rng).unwrap();
    let transform = RankTransform::fit(&DepthSpec::halfspace(), &x).unwrap();
    let mut ranks: Vec<f64> = y.rows().map(|p| transform.rank(p).unwrap()).collect();
    ranks.sort_by(f64::total_cmp);
    let len = ranks.len() as f64;
    // Empirical CDF against U[0,1], evaluated on both sides of every jump.
    let mut ks = 0.0f64;
    let mut k = 0;
    while k < ranks.len() {
        let v = ranks[k];
        let below = k as f64 / len;
        while k < ranks.len() && ranks[k] == v {
            k += 1;
        }
        let at = k as f64 / len;
        ks = ks.max((v - below).abs()).max((at - v).abs());
    }
    let critical = 1.63 / len.sqrt();
    outcome(ks < critical, format!("KS distance {ks:.5} vs critical {critical:.5}"))
}

fn binary(args: &[&str], threads: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_depthrank"))
        .arg("--threads")
        .arg(threads)
        .args(args)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

/// Manifest without the wall-clock field, which is the only non-seeded value.
fn stable_manifest(path: &Path) -> serde_json::Value {
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    doc.as_object_mut().unwrap().remove("wall_time_seconds");
    doc
}

fn determinism() -> Outcome {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let fx = |name: &str| fixtures.join(name).to_string_lossy().into_owned();
    let (x, y) = (fx("null_x.csv"), fx("null_y.csv"));
    let stdout_commands: Vec<Vec<String>> = [
        vec!["qtest", "--x", &x, "--y", &y, "--mode", "approximate", "--direction-seed", "3"],
        vec!["qtest", "--x", &x, "--y", &y, "--method", "halfspace"],
        vec!["competitor", "--x", &x, "--y", &y, "--test", "oja", "--oja-mode", "sampled", "--subsets", "500", "--seed", "4"],
        vec!["depth", "--x", &y, "--ref", &x, "--mode", "approximate", "--direction-seed", "5"],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();
    let mut differing = Vec::new();
    for cmd in &stdout_commands {
        let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
        let runs = [binary(&args, "1"), binary(&args, "1"), binary(&args, "4")];
        if runs.iter().any(|r| r != &runs[0]) {
            differing.push(cmd[0].clone());
        }
    }
    let grid_commands: [(&str, Vec<&str>); 2] = [
        ("power", vec![
            "power", "--family", "location-scale", "--param-grid", "0.1,0.3", "--m", "20", "--test", "q",
            "--reps", "60", "--seed", "77", "--mode", "approximate", "--directions", "300",
        ]),
        ("table4", vec!["reproduce", "--target", "table4", "--budget", "quick", "--seed", "78"]),
    ];
    for (stem, args) in grid_commands {
        let results: Vec<(Vec<u8>, Vec<u8>, serde_json::Value)> = ["1", "1", "4"]
            .iter()
            .map(|threads| {
                let dir = tempfile::tempdir().unwrap();
                let mut full = args.clone();
                full.extend(["--out", dir.path().to_str().unwrap()]);
                let stdout = binary(&full, threads);
                let csv = fs::read(dir.path().join(format!("{stem}.csv"))).unwrap();
                let manifest = stable_manifest(&dir.path().join(format!("{stem}.manifest.json")));
                (stdout, csv, manifest)
            })
            .collect();
        if results.iter().any(|r| r != &results[0]) {
            differing.push(stem.to_string());
        }
    }
    let total = stdout_commands.len() + 2;
    if differing.is_empty() {
        outcome(true, format!("{total} seeded commands identical over two runs and threads 1/4"))
    } else {
        outcome(false, format!("non-reproducible output from: {}", differing.join(", ")))
    }
}

#[test]
fn acceptance_criteria() {
    type Check = fn() -> Outcome;
    let criteria: [(u32, &str, Check, Option<Duration>); 11] = [
        (1, "analytic T2 power rows", analytic_t2_rows, Some(Duration::from_secs(1))),
        (2, "analytic Q power rows", analytic_q_rows, Some(Duration::from_secs(10))),
        (3, "closed-form Q vs empirical Q", closed_form_vs_empirical, Some(Duration::from_secs(120))),
        (4, "null calibration", null_calibration, Some(Duration::from_secs(600))),
        (5, "small-sample table", small_sample_table, Some(Duration::from_secs(900))),
        (6, "halfspace exactness", halfspace_exactness, Some(Duration::from_secs(30))),
        (7, "projection exactness", projection_exactness, Some(Duration::from_secs(120))),
        (8, "Wilcoxon identity", wilcoxon_identity, Some(Duration::from_secs(5))),
        (9, "variance sanity", variance_sanity, Some(Duration::from_secs(60))),
        (10, "uniform rank property", uniform_ranks, Some(Duration::from_secs(300))),
        (11, "determinism", determinism, None),
    ];
    let mut failed = Vec::new();
    for (id, name, check, limit) in criteria {
        let started = Instant::now();
        let mut result = check();
        let elapsed = started.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                result.pass = false;
                result.detail.push_str(&format!("; exceeded {}s limit", limit.as_secs()));
            }
        }
        println!(
            "criterion {id:>2} {:<4} {name}: {} [{:.2}s]",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
        if !result.pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed acceptance criteria: {failed:?}");
}

