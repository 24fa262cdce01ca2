//! End-to-end runs of the `kpzlab` binary. The file name sorts before the
//! acceptance target, which exits nonzero while any criterion fails.

use std::path::Path;
use std::process::{Command, Output};

fn kpzlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpzlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = kpzlab(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn sample_matrix_rows_and_header() {
    let text = run_ok(&["sample-matrix", "--n", "2000", "--reps", "7", "--seed", "3"]);
    assert!(text.contains("# seed=3"));
    assert!(text.contains("# ensemble=tridiagonal"));
    assert!(text.lines().any(|l| l == "replica,value,saturated"));
    assert_eq!(data_rows(&text).len(), 7);
}

#[test]
fn zero_reps_gives_header_only() {
    let text = run_ok(&["sample-matrix", "--reps", "0"]);
    assert!(data_rows(&text).is_empty());
    assert!(text.trim_end().ends_with("replica,value,saturated"));
}

#[test]
fn dense_ensembles_reject_other_beta() {
    let out = kpzlab(&["sample-matrix", "--beta", "3", "--ensemble", "gaussian"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
    run_ok(&["sample-matrix", "--beta", "3", "--n", "300", "--reps", "2"]);
    assert_eq!(kpzlab(&["sample-matrix", "--ensemble", "wishart"]).status.code(), Some(2));
    assert_eq!(kpzlab(&["sample-matrix", "--alpha", "-1"]).status.code(), Some(2));
    assert_eq!(kpzlab(&["sample-matrix", "--bogus"]).status.code(), Some(2));
}

#[test]
fn output_does_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (p, w) in [(&a, "1"), (&b, "3")] {
        run_ok(&[
            "sample-airy", "--reps", "12", "--n-sim", "800", "--seed", "5", "--workers", w, "--out",
            p.to_str().unwrap(),
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# desk run\nalpha = 0.5\nn = 500\nreps = 4\nseed = 9\n").unwrap();
    let text = run_ok(&["sample-matrix", "--config", cfg.to_str().unwrap(), "--reps", "2"]);
    assert!(text.contains("# alpha=0.5"));
    assert!(text.contains("# n=500"));
    assert!(text.contains("# reps=2"));
    assert_eq!(data_rows(&text).len(), 2);
    std::fs::write(&cfg, "nonsense_key = 1\n").unwrap();
    assert_eq!(kpzlab(&["sample-matrix", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn airy_truncation_bound_column_is_positive() {
    let text = run_ok(&["sample-airy", "--reps", "3", "--n-sim", "500"]);
    assert!(text.lines().any(|l| l == "replica,value,truncation_bound"));
    for row in data_rows(&text) {
        assert!(row[2] > 0.0 && row[2].is_finite());
    }
}

#[test]
fn airy_top_k_rows_are_descending() {
    let text = run_ok(&["sample-airy", "--k", "4", "--beta", "4", "--reps", "3", "--n-sim", "500"]);
    for row in data_rows(&text) {
        assert_eq!(row.len(), 5);
        assert!(row[1..].windows(2).all(|w| w[0] >= w[1]));
    }
    assert_eq!(kpzlab(&["sample-airy", "--beta", "4"]).status.code(), Some(2));
}

#[test]
fn excursion_noise_seed_is_separate() {
    let base = ["sample-excursion", "--reps", "3", "--n-excursions", "50", "--seed", "1"];
    let a = run_ok(&[&base[..], &["--noise-seed", "10"]].concat());
    let b = run_ok(&[&base[..], &["--noise-seed", "10"]].concat());
    let c = run_ok(&[&base[..], &["--noise-seed", "11"]].concat());
    assert_eq!(a, b);
    assert_ne!(data_rows(&a), data_rows(&c));
    assert!(a.contains("# noise_seed=10"));
    assert!(a.lines().any(|l| l == "replica,value,se,exceedances"));
}

#[test]
fn eval_laplace_table() {
    let a = data_rows(&run_ok(&["eval-laplace", "--u-grid", "0,0.5,2,8", "--order", "200"]));
    assert_eq!(a[0], vec![0.0, 1.0]);
    let b = data_rows(&run_ok(&["eval-laplace", "--u-grid", "0,0.5,2,8", "--order", "400"]));
    for (x, y) in a.iter().zip(&b) {
        assert!((x[1] - y[1]).abs() < 1e-8);
    }
    let one = run_ok(&["eval-laplace", "--beta", "1", "--reps", "50", "--u-grid", "0.5,1"]);
    assert!(one.lines().any(|l| l == "u,value,se,corrected_lower"));
    assert_eq!(kpzlab(&["eval-laplace", "--u-grid", "-1"]).status.code(), Some(2));
}

#[test]
fn compare_self_mismatch_and_failure() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let c = dir.path().join("c.csv");
    run_ok(&["sample-airy", "--reps", "60", "--n-sim", "500", "--out", a.to_str().unwrap()]);
    run_ok(&["sample-airy", "--reps", "60", "--n-sim", "500", "--alpha", "2", "--out", c.to_str().unwrap()]);
    let report = run_ok(&["compare", "--left", a.to_str().unwrap(), "--right", a.to_str().unwrap()]);
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(json["reports"][0]["statistic"], 0.0);

    let out = kpzlab(&["compare", "--left", a.to_str().unwrap(), "--right", c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));

    let out = kpzlab(&[
        "compare", "--left", a.to_str().unwrap(), "--test", "tw2", "--max-distance", "0",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn compare_writes_curves() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let curves = dir.path().join("curves");
    run_ok(&["sample-airy", "--reps", "40", "--n-sim", "500", "--out", a.to_str().unwrap()]);
    kpzlab(&[
        "compare", "--left", a.to_str().unwrap(), "--test", "laplace-beta2", "--n-bootstrap", "50", "--dat",
        curves.to_str().unwrap(),
    ]);
    let exact = read(&curves.join("fredholm.dat"));
    assert_eq!(exact.lines().count(), 7);
    assert!(exact.lines().all(|l| l.split(' ').count() == 2));
}

#[test]
fn tw2_table_is_monotone_with_limits() {
    let rows = data_rows(&run_ok(&["tw2", "--s-min", "-9", "--s-max", "6", "--points", "31"]));
    assert!(rows.windows(2).all(|w| w[0][1] <= w[1][1]));
    assert!(rows[0][1] < 1e-6);
    assert!(rows[30][1] > 1.0 - 1e-8);
}
