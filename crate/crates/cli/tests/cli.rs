use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dirichlet-dp"));
    c.env_remove("DIRICHLET_DP_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(str::to_string).collect()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn replay(dir: &Path) -> TempDir {
    let again = TempDir::new().unwrap();
    let m = dir.join("manifest.json");
    ok(&["replay", m.to_str().unwrap(), "--out-dir", again.path().to_str().unwrap()]);
    again
}

fn assert_same(a: &Path, b: &Path, files: &[&str]) {
    for f in files {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs after replay");
    }
}

const AVERAGE_AUDIT: [&str; 18] = [
    "audit", "--n", "3", "--w-indices", "0,1", "--eta", "0.05", "--eta-bar", "0.05", "--b", "1", "--k", "24", "--query",
    "average", "--N", "100", "--delta-hat",
];

#[test]
fn average_audit_reports_expected_epsilon() {
    let mut args = AVERAGE_AUDIT.to_vec();
    args.push("0.05");
    let out = ok(&args);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let eps = report["epsilon"].as_f64().unwrap();
    let delta = report["delta"].as_f64().unwrap();
    assert!((eps - 1.18).abs() <= 0.15, "epsilon {eps}");
    assert!((delta - 0.05).abs() <= 1e-3, "delta {delta}");
    assert_eq!(report["divisor_convention"], "collection_size");
    assert_eq!(report["diagnostics"]["binding"], true);

    args.extend(["--divisor", "n"]);
    let dim: Value = serde_json::from_slice(&ok(&args).stdout).unwrap();
    assert!(dim["epsilon"].as_f64().unwrap() > 10.0 * eps);
}

#[test]
fn empirical_audit_artifacts_and_replay() {
    let dir = TempDir::new().unwrap();
    let mut args = AVERAGE_AUDIT.to_vec();
    args.extend(["0.05", "--empirical", "--samples", "5e3", "--out-dir", dir.path().to_str().unwrap()]);
    let out = bin().args(&args).env("DIRICHLET_DP_SEED", "11").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut expected: Vec<String> = [
        "samples",
        "omega1_count",
        "empirical_delta",
        "delta_lower",
        "delta_upper",
        "confidence",
        "max_observed_loss",
        "loss_violations",
        "epsilon",
        "underflow_redraws",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    expected.extend((0..3).map(|i| format!("mean_{i}")));
    expected.extend((0..3).map(|i| format!("variance_{i}")));
    assert_eq!(header(&dir.path().join("audit.csv")), expected);

    let row = csv::Reader::from_path(dir.path().join("audit.csv"))
        .unwrap()
        .records()
        .next()
        .unwrap()
        .unwrap();
    assert_eq!(&row[0], "5000");
    assert_eq!(&row[7], "0");

    let m = manifest(dir.path());
    assert_eq!(m["seed"], 11);
    assert_eq!(m["command"], "audit");
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 2);

    let again = replay(dir.path());
    assert_same(dir.path(), again.path(), &["report.json", "audit.csv"]);
}

#[test]
fn curves_match_plotted_pair() {
    let out = ok(&[
        "curves", "--eta", "0.25", "--eta-bar", "0.25", "--k", "4.1", "--b", "0.1", "--w-size", "3", "--delta-grid",
        "0.045:0.055:0.005",
    ]);
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(r.headers().unwrap(), vec!["delta", "gamma", "epsilon_exact", "epsilon_approx"]);
    let rows: Vec<Vec<f64>> = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1][2] < w[0][2] && w[1][3] < w[0][3]));
    let mid = &rows[1];
    assert_eq!(mid[0], 0.05);
    assert!((mid[2] - 1.20292).abs() < 0.05 && (mid[3] - 1.66867).abs() < 0.05, "{mid:?}");
}

#[test]
fn curves_replay() {
    let dir = TempDir::new().unwrap();
    ok(&[
        "curves", "--eta", "0.2", "--eta-bar", "0.2", "--k", "5.1", "--b", "0.1", "--w-size", "3", "--delta-grid",
        "0.02:0.03:0.01", "--out-dir", dir.path().to_str().unwrap(),
    ]);
    let m = manifest(dir.path());
    assert_eq!(m["command"], "curves");
    assert!(m["seed"].is_null());
    let again = replay(dir.path());
    assert_same(dir.path(), again.path(), &["curves.csv"]);
}

#[test]
fn sample_moments_and_replay() {
    let out = ok(&["sample", "--p", "0.5,0.5", "--k", "24", "--count", "1e5", "--seed", "3", "--parallel"]);
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(r.headers().unwrap(), vec!["x0", "x1"]);
    let xs: Vec<f64> = r.records().map(|rec| rec.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(xs.len(), 100_000);
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    assert!((mean - 0.5).abs() < 3.0 * (0.01f64 / 1e5).sqrt(), "mean {mean}");
    assert!((var - 0.01).abs() < 0.0005, "variance {var}");

    let dir = TempDir::new().unwrap();
    ok(&["sample", "--p", "0.2,0.3,0.5", "--k", "10", "--count", "2000", "--out-dir", dir.path().to_str().unwrap()]);
    let again = replay(dir.path());
    assert_same(dir.path(), again.path(), &["samples.csv"]);
}

#[test]
fn simulate_tables_and_replay() {
    let dir = TempDir::new().unwrap();
    ok(&["simulate", "--runs", "500", "--seed", "5", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(header(&dir.path().join("outputs.csv")), ["arm", "run", "x0", "x1", "x2"]);
    assert_eq!(header(&dir.path().join("summary.csv")), ["arm", "statistic", "x0", "x1", "x2"]);
    let summary: Vec<(String, String)> = csv::Reader::from_path(dir.path().join("summary.csv"))
        .unwrap()
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].to_string())
        })
        .collect();
    let stats = ["average", "mean", "variance", "expected_variance"];
    let expected: Vec<(String, String)> = ["P", "Q"]
        .iter()
        .flat_map(|a| stats.iter().map(move |s| (a.to_string(), s.to_string())))
        .collect();
    assert_eq!(summary, expected);

    let m = manifest(dir.path());
    assert_eq!(m["fixture_sha256"].as_str().unwrap().len(), 64);
    let again = replay(dir.path());
    assert_same(dir.path(), again.path(), &["outputs.csv", "summary.csv"]);
}

#[test]
fn simulate_rejects_fixture_hash_mismatch() {
    let dir = TempDir::new().unwrap();
    let fixture = dir.path().join("collection.csv");
    fs::write(&fixture, include_str!("../../core/fixtures/average_query_collection.csv")).unwrap();
    let path = fixture.to_str().unwrap();
    let out = run(&["simulate", "--runs", "10", "--fixture", path, "--fixture-sha256", &"0".repeat(64)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fixture hash mismatch"), "{}", String::from_utf8_lossy(&out.stderr));

    let good = "ecf22ceac7f42e27c3445f9d274271801dc3f22c78a8bf9f0ba6da1427328940";
    ok(&["simulate", "--runs", "10", "--fixture", path, "--fixture-sha256", good]);
}

#[test]
fn exit_codes() {
    let base = ["audit", "--n", "3", "--w-indices", "0,1", "--eta", "0.05", "--eta-bar", "0.05", "--k", "24"];
    let code = |extra: &[&str]| {
        let mut a = base.to_vec();
        a.extend_from_slice(extra);
        run(&a).status.code()
    };
    assert_eq!(code(&["--b", "0", "--delta-hat", "0.05"]), Some(1));
    assert_eq!(code(&["--b", "1", "--delta-hat", "0.05", "--gamma", "0.01"]), Some(1));
    assert_eq!(code(&["--b", "1"]), Some(1));
    assert_eq!(run(&["curves", "--help"]).status.code(), Some(0));

    let infeasible = run(&[
        "audit", "--n", "3", "--w-indices", "0,1", "--eta", "0.6", "--eta-bar", "0.05", "--b", "1", "--k", "24",
        "--delta-hat", "0.05",
    ]);
    assert_eq!(infeasible.status.code(), Some(2));

    let calibration = run(&[
        "audit", "--n", "3", "--w-indices", "0,1", "--eta", "0.05", "--eta-bar", "0.05", "--b", "1", "--k", "0.2",
        "--delta-hat", "1e-3",
    ]);
    assert_eq!(calibration.status.code(), Some(3));
}
