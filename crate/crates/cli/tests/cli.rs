use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distortion"))
        .args(args)
        .output()
        .expect("spawn distortion")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distortion"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn distortion")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn cell(rows: &[Vec<String>], r: usize, c: usize) -> f64 {
    rows[r][c].parse().unwrap()
}

#[test]
fn bound_table_at_quarter() {
    let o = run(&["bound", "--s", "0.25", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 1);
    assert_eq!(cell(&rows, 0, 0), 0.25);
    assert!((cell(&rows, 0, 1) - 0.5).abs() < 1e-8);
    assert!((cell(&rows, 0, 2) - 0.5).abs() < 1e-8);
}

#[test]
fn bound_with_log_square_cost() {
    let o = run(&["bound", "--cost", "logsq", "--s", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    // ln(1/2)^2 + ln(1/2)^2 at the conformal point (1/2, 1/2).
    let want = 2.0 * 0.5f64.ln().powi(2);
    assert!((cell(&rows, 0, 3) - want).abs() < 1e-6, "{}", rows[0][3]);
    assert_eq!(rows[0][6], "true");
}

#[test]
fn bound_range_and_json() {
    let o = run(&[
        "bound", "--s-min", "0.1", "--s-max", "1", "--n", "10", "--log", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 10);
    let last = &rows[9];
    assert!((last["s"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(last["f"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn bound_reads_scan_file_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let scan = dir.path().join("scan.toml");
    std::fs::write(&scan, "s_min = 0.5\ns_max = 1.0\nn = 3\np = 4.0\n").unwrap();
    let o = run(&["bound", "--scan", scan.to_str().unwrap(), "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 2);
    let f = cell(&rows, 0, 1);
    assert!((cell(&rows, 0, 2) - f * f).abs() <= 1e-8 * f * f);
}

#[test]
fn bound_without_values_is_usage_error() {
    assert_eq!(run(&["bound"]).status.code(), Some(1));
    assert_eq!(run(&["bound", "--s", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["bound", "--s", "0.5", "--p", "1"]).status.code(), Some(1));
}

#[test]
fn phase_winners() {
    let o = run(&[
        "phase", "--lambda", "0.2", "--lambda", "0.5", "--lambda", "0.7", "--grid", "32",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows[0][5], "twist");
    assert!((cell(&rows, 0, 2) - 1.28).abs() < 1e-9);
    assert!((cell(&rows, 0, 3) - 0.92).abs() < 1e-9);
    assert_eq!(rows[1][5], "tie");
    assert_eq!(rows[2][5], "homothety");
    assert!((cell(&rows, 2, 2) - 0.18).abs() < 1e-9);
}

#[test]
fn verify_suites_pass() {
    for suite in [
        "sandwich_k",
        "sandwich_co",
        "pointwise_bound",
        "polar_identity",
        "dist_k_oracle",
    ] {
        let o = run(&["verify", "--suite", suite, "--n", "500"]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{suite}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["violations"], 0);
    }
}

#[test]
fn verify_violation_exits_two() {
    // An oracle tolerance of zero cannot be met by a finite grid.
    let o = run(&[
        "verify",
        "--suite",
        "dist_k_oracle",
        "--n",
        "200",
        "--oracle-points",
        "16",
        "--oracle-tol",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["violations"].as_u64().unwrap() > 0);
}

#[test]
fn verify_unknown_suite() {
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(1));
}

#[test]
fn construct_twist_out_of_range() {
    let o = run(&["construct", "twist", "--lambda", "0.7"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda"));
}

#[test]
fn construct_twist_writes_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &["construct", "twist", "--lambda", "0.2", "--svg", "--n-r", "128"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["gap"].as_f64().unwrap().abs() <= 1e-9);
    for f in ["report.json", "profile.csv", "shape.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let svg = std::fs::read_to_string(dir.path().join("shape.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn construct_ode_energy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ode");
    let o = run(&["construct", "ode", "--alpha", "3", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["energy"].as_f64().unwrap() - 7.0 / 9.0).abs() < 1e-5);
    assert!((v["volume_ratio"].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-5);
    let profile = std::fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(profile.starts_with("r,psi,dpsi,h,dh,sigma1,sigma2,jacobian\n"));
    assert_eq!(profile.lines().count(), 257);
}

#[test]
fn construct_ode_alpha_too_small() {
    assert_eq!(run(&["construct", "ode", "--alpha", "1.5"]).status.code(), Some(3));
    assert_eq!(run(&["construct", "ode"]).status.code(), Some(1));
}

#[test]
fn critical_polynomial_converges() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["critical", "--map", "poly-b", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 3);
    assert!((cell(&rows, 0, 5) - 2.0).abs() < 0.05);
    let study = std::fs::read_to_string(dir.path().join("refinement_piola.csv")).unwrap();
    assert!(study.starts_with("h,residual,slope\n"));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["phase", "--grid", "many"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn reruns_are_byte_identical() {
    let cases: [&[&str]; 3] = [
        &["verify", "--suite", "pointwise_bound", "--n", "300", "--seed", "7"],
        &["phase", "--n", "5", "--grid", "16", "--format", "json"],
        &["construct", "ode", "--alpha", "2.5", "--n-r", "128"],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
