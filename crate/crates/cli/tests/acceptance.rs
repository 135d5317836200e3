//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line. Criteria 1 through 5 and 7 lean on the library's
//! self-check suites; 6 and 8 drive the compiled binary the way a user
//! would.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use riemann_accel_core::integrate::estimate_rate_points;
use riemann_accel_core::verify::{all_pass, CheckResult};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_riemann-accel"))
}

fn tmp(tag: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("riemann-accel-acceptance-{tag}-{}.csv", std::process::id()));
    p
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn assert_budget(criterion: &str, elapsed: Duration, budget: Duration) {
    assert!(
        elapsed <= budget,
        "criterion {criterion} overran its {budget:?} budget: took {elapsed:?}"
    );
}

fn require(results: &[CheckResult], names: &[&str]) -> (bool, String) {
    let mut pass = true;
    let mut worst = String::new();
    for want in names {
        let found = results.iter().find(|c| c.name.starts_with(want));
        match found {
            Some(c) if c.pass => {}
            Some(c) => {
                pass = false;
                worst = format!("{} residual {:.3e} > {:.1e}", c.name, c.residual, c.tolerance);
            }
            None => {
                pass = false;
                worst = format!("check '{want}' missing");
            }
        }
    }
    if pass {
        worst = format!("{} checks green", names.len());
    }
    (pass, worst)
}

/// (t, f_gap) pairs from a CSV written by the binary.
fn csv_gaps(path: &PathBuf) -> Vec<(usize, f64, f64)> {
    let text = std::fs::read_to_string(path).expect("csv exists");
    text.lines()
        .skip(1)
        .filter_map(|line| {
            let mut it = line.split(',');
            let k: usize = it.next()?.parse().ok()?;
            let t: f64 = it.next()?.parse().ok()?;
            let gap: f64 = it.next()?.parse().ok()?;
            Some((k, t, gap))
        })
        .collect()
}

fn first_reaching(rows: &[(usize, f64, f64)], gap: f64) -> Option<usize> {
    rows.iter().find(|r| r.2 <= gap).map(|r| r.0)
}

#[test]
fn criterion_1_geometry_suite() {
    let start = Instant::now();
    let results = riemann_accel_core::verify::geometry_suite();
    let (pass, detail) = require(
        &results,
        &[
            "exp-log-roundtrip[sphere]",
            "exp-log-roundtrip[hyperboloid]",
            "exp-log-roundtrip[euclidean]",
            "transport-isometry[sphere]",
            "transport-isometry[hyperboloid]",
            "transport-isometry[euclidean]",
            "gradient-fd[rayleigh]",
            "gradient-fd[hyperbolic]",
            "gradient-fd[quadratic]",
            "covariant-derivative-chart[sphere]",
        ],
    );
    let ok = pass && all_pass(&results);
    report("1 (geometry suite)", ok, &detail);
    assert_budget("1", start.elapsed(), Duration::from_secs(5));
}

#[test]
fn criterion_2_polynomial_rate_bound() {
    let start = Instant::now();
    let results = riemann_accel_core::verify::convergence_suite();
    let (pass, detail) = require(
        &results,
        &[
            "rate-bound[p=2]",
            "lyapunov-slack[p=2]",
            "lyapunov-halving[p=2]",
            "rate-bound[p=4]",
            "lyapunov-slack[p=4]",
            "lyapunov-halving[p=4]",
        ],
    );
    report("2 (continuous rate, p in {2,4})", pass, &detail);
    assert_budget("2", start.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_3_strongly_convex_bound() {
    let start = Instant::now();
    let results = riemann_accel_core::verify::convergence_suite();
    let (pass, detail) = require(&results, &["sc-rate-bound[hyperbolic]"]);
    report("3 (strongly convex exponential bound)", pass, &detail);
    assert_budget("3", start.elapsed(), Duration::from_secs(10));
}

#[test]
fn criterion_4_time_rescaling() {
    let start = Instant::now();
    let results = riemann_accel_core::verify::rescaling_suite();
    let (pass, detail) = require(&results, &["rescaling-equivalence", "rescaling-step-decay"]);
    report("4 (time-rescaling equivalence)", pass, &detail);
    assert_budget("4", start.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_5_poincare_consistency() {
    let start = Instant::now();
    let results = riemann_accel_core::verify::rescaling_suite();
    let (pass, detail) = require(&results, &["poincare-zero-level", "poincare-direct-match"]);
    report("5 (transformed-Hamiltonian consistency)", pass, &detail);
    assert_budget("5", start.elapsed(), Duration::from_secs(10));
}

#[test]
fn criterion_6_discrete_algorithm_findings() {
    let start = Instant::now();

    // (a) default p=6 benchmark: fitted log-log slope at least as steep as
    // the certified continuous rate.
    let out_a = tmp("6a");
    let status = bin()
        .args(["run", "--p", "6", "--out"])
        .arg(&out_a)
        .output()
        .expect("binary runs");
    assert!(status.status.success(), "6a run failed: {}", String::from_utf8_lossy(&status.stderr));
    let rows = csv_gaps(&out_a);
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.1, r.2)).collect();
    let keep = (3 * points.len()).div_ceil(5);
    let window = (points[points.len() - keep].0, points[points.len() - 1].0);
    let est = estimate_rate_points(&points, window).expect("fit succeeds");
    let slope_ok = est.slope <= -6.0;

    // (b) iteration count to gap 1e-8 at matched h = 1e-4: run p=6 first,
    // then give p=2 the same budget and watch it fall short.
    let out_p6 = tmp("6b-p6");
    let ok = bin()
        .args([
            "run", "--p", "6", "--h", "1e-4", "--iters", "70000", "--record-every", "10",
            "--out",
        ])
        .arg(&out_p6)
        .output()
        .expect("binary runs")
        .status
        .success();
    assert!(ok, "6b p=6 run failed");
    let k6 = first_reaching(&csv_gaps(&out_p6), 1e-8);

    let out_p2 = tmp("6b-p2");
    let ok = bin()
        .args([
            "run", "--p", "2", "--h", "1e-4", "--iters", "70000", "--record-every", "10",
            "--out",
        ])
        .arg(&out_p2)
        .output()
        .expect("binary runs")
        .status
        .success();
    assert!(ok, "6b p=2 run failed");
    let k2 = first_reaching(&csv_gaps(&out_p2), 1e-8);
    let matched_h_ok = match (k6, k2) {
        (Some(k6), Some(k2)) => k6 < k2,
        (Some(_), None) => true,
        _ => false,
    };

    // (c) Version II beats Version I to the same gap at matched (p, h).
    let out_v2 = tmp("6c-v2");
    let ok = bin()
        .args([
            "run", "--p", "6", "--h", "1e-4", "--iters", "70000", "--record-every", "10",
            "--version", "2", "--out",
        ])
        .arg(&out_v2)
        .output()
        .expect("binary runs")
        .status
        .success();
    assert!(ok, "6c version II run failed");
    let k_v2 = first_reaching(&csv_gaps(&out_v2), 1e-8);
    let version_ok = match (k_v2, k6) {
        (Some(k_v2), Some(k6)) => k_v2 < k6,
        _ => false,
    };

    for p in [&out_a, &out_p6, &out_p2, &out_v2] {
        std::fs::remove_file(p).ok();
    }

    let pass = slope_ok && matched_h_ok && version_ok;
    report(
        "6 (discrete algorithm findings)",
        pass,
        &format!(
            "slope {:.2} <= -6: {slope_ok}; k(p=6)={k6:?} vs k(p=2)={k2:?}: {matched_h_ok}; k(II)={k_v2:?} < k(I)={k6:?}: {version_ok}",
            est.slope
        ),
    );
    assert_budget("6", start.elapsed(), Duration::from_secs(60));
}

#[test]
fn criterion_7_rate_fit_exactness() {
    let start = Instant::now();
    let points: Vec<(f64, f64)> = (1..=500)
        .map(|k| {
            let t = 0.05 * k as f64;
            (t, t.powi(-2))
        })
        .collect();
    let est = estimate_rate_points(&points, (0.05, 25.0)).expect("fit succeeds");
    let pass = (est.slope + 2.0).abs() <= 1e-9 && (est.r_squared - 1.0).abs() <= 1e-12;
    report(
        "7 (rate-fit exactness)",
        pass,
        &format!("slope {:.12}, r^2 {:.15}", est.slope, est.r_squared),
    );
    assert_budget("7", start.elapsed(), Duration::from_secs(1));
}

#[test]
fn criterion_8_determinism() {
    let a = tmp("det-a");
    let b = tmp("det-b");
    for out in [&a, &b] {
        let ok = bin()
            .args(["run", "--iters", "2000", "--out"])
            .arg(out)
            .output()
            .expect("binary runs")
            .status
            .success();
        assert!(ok, "determinism run failed");
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    std::fs::remove_file(&a).ok();
    std::fs::remove_file(&b).ok();
    report(
        "8 (byte-identical reruns)",
        bytes_a == bytes_b,
        &format!("{} bytes compared", bytes_a.len()),
    );
}
