use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qmcis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmcis"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_full_precision_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("h.csv");
    let out = qmcis(&[
        "generate",
        "--kind",
        "halton",
        "--n",
        "4",
        "--dim",
        "2",
        "--out",
        path_str(&file),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&file).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], vec![0.5, 1.0 / 3.0]);
    assert_eq!(rows[3], vec![0.125, 4.0 / 9.0]);
}

#[test]
fn discrepancy_of_generated_points() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.csv");
    fs::write(&file, "0.125\n0.375\n0.625\n0.875\n").unwrap();
    let v = json(&qmcis(&["discrepancy", "--points", path_str(&file)]));
    assert!((v["value"].as_f64().unwrap() - 0.125).abs() < 1e-15);
    assert_eq!(v["mode"], "exact");
    assert_eq!(v["boxes_evaluated"], 10);

    let lb = json(&qmcis(&[
        "discrepancy",
        "--points",
        path_str(&file),
        "--mode",
        "lower-bound",
        "--effort",
        "50",
    ]));
    assert_eq!(lb["mode"], "lower-bound");
    assert!(lb["value"].as_f64().unwrap() <= 0.125 + 1e-15);

    let over = qmcis(&["discrepancy", "--points", path_str(&file), "--budget", "2"]);
    assert_eq!(over.status.code(), Some(2));
}

#[test]
fn weighted_discrepancy_with_dirichlet_measure() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("p.csv");
    let weights = dir.path().join("w.txt");
    fs::write(&points, "0.2\n0.7\n").unwrap();
    fs::write(&weights, "0.25\n0.75\n").unwrap();
    let v = json(&qmcis(&[
        "discrepancy",
        "--points",
        path_str(&points),
        "--weights",
        path_str(&weights),
        "--measure",
        "dirichlet:2,2",
    ]));
    // π([0,0.7)) = 0.784 against mass 0.25 below 0.7
    assert!((v["value"].as_f64().unwrap() - 0.534).abs() < 1e-12, "{v}");
    let same = json(&qmcis(&[
        "discrepancy",
        "--points",
        path_str(&points),
        "--weights",
        path_str(&weights),
        "--measure",
        "dirichlet:d=1,alpha=2,2",
    ]));
    assert_eq!(v["value"], same["value"]);
}

#[test]
fn estimate_reports_errors_against_closed_form() {
    let v = json(&qmcis(&[
        "estimate",
        "--kind",
        "sobol",
        "--n",
        "65536",
        "--model",
        "dirichlet:d=2,alpha=2,2,2",
        "--integrand",
        "monomial:gamma=1,1",
    ]));
    assert!((v["reference"].as_f64().unwrap() - 1.0 / 42.0).abs() < 1e-15);
    assert!(v["normalized_error"].as_f64().unwrap() < 0.01);
    assert!(v.get("weights_used").is_none());
    assert_eq!(v["n"], 65536);
}

#[test]
fn estimate_from_file_with_weights() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.csv");
    fs::write(&file, "0.1,0.2\n0.3,0.3\n").unwrap();
    let v = json(&qmcis(&[
        "estimate",
        "--points",
        path_str(&file),
        "--model",
        "uniform:d=2",
        "--integrand",
        "constant:c=2.5",
        "--with-weights",
    ]));
    assert_eq!(v["estimate"], 2.5);
    assert_eq!(v["weights_used"], serde_json::json!([0.5, 0.5]));
    assert_eq!(v["normalized_error"], 0.0);
}

#[test]
fn estimate_rejects_points_outside_the_support() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.csv");
    fs::write(&file, "0.9,0.9\n0.8,0.7\n").unwrap();
    let out = qmcis(&[
        "estimate",
        "--points",
        path_str(&file),
        "--model",
        "dirichlet:d=2,alpha=2,2,2",
        "--integrand",
        "monomial:gamma=1,1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn verify_emits_one_report_per_n_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    let out = qmcis(&[
        "verify",
        "--model",
        "dirichlet:d=2,alpha=2,2,2",
        "--integrand",
        "monomial:gamma=1,1",
        "--kind",
        "halton",
        "--n-list",
        "64,128",
        "--summary",
        path_str(&summary),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let reports: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[1]["n"], 128);
    for r in &reports {
        assert!(r["main"]["passed"].as_bool().unwrap());
        let rhs = 4.0 * r["h1_norm"].as_f64().unwrap() * r["u_d_estimate"].as_f64().unwrap()
            / r["u_l1"].as_f64().unwrap()
            * r["d_classical"].as_f64().unwrap();
        assert_eq!(r["rhs_main"].as_f64().unwrap(), rhs);
    }
    let table = fs::read_to_string(&summary).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.lines().skip(1).all(|l| l.ends_with(",pass")));
}

#[test]
fn experiment_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("study.cfg");
    fs::write(
        &config,
        "dims = 2\nn_grid = 64,128,256,512,1024\nkinds = sobol,uniform\nreps = 4\nseed = 3\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = qmcis(&[
        "experiment",
        "--config",
        path_str(&config),
        "--out",
        path_str(&out_dir),
    ]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let convergence = fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    assert_eq!(convergence.lines().count(), 11);
    assert!(convergence.lines().skip(1).all(|l| l
        .split(',')
        .nth(4)
        .unwrap()
        .parse::<f64>()
        .unwrap()
        * 42.0
        - 1.0
        < 1e-12));
    let rates = fs::read_to_string(out_dir.join("rates.csv")).unwrap();
    assert_eq!(rates.lines().count(), 3);
    assert!(out_dir.join("checks.csv").exists());
}

#[test]
fn bad_specs_are_usage_errors() {
    let out = qmcis(&[
        "estimate",
        "--kind",
        "sobol",
        "--n",
        "8",
        "--model",
        "gauss:d=2",
        "--integrand",
        "monomial:gamma=1,1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = qmcis(&["generate", "--kind", "sobol", "--n", "8", "--dim", "17"]);
    assert_eq!(out.status.code(), Some(2));
}
