use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn egl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_egl"))
        .args(args)
        .env("EGL_LOG", "quiet")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_line(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("error line on stderr");
    serde_json::from_str(line).expect("error line is JSON")
}

/// Value in `column` of the first data row.
fn cell(csv: &str, column: &str) -> String {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == column).expect(column);
    row[i].to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn equilibrium_reports_cd1_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eq");
    let r = egl(&["equilibrium", "--scenario", s(&scenario("cd1.json")), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));

    let side = fs::read_to_string(out.join("energy_side.csv")).unwrap();
    let scalars = fs::read_to_string(out.join("energy_scalars.csv")).unwrap();
    let q: f64 = cell(&side, "Q_star").parse().unwrap();
    let e: f64 = cell(&scalars, "E_total").parse().unwrap();
    assert!(rel(q, 5.0) < 1e-6);
    assert!(rel(e, 25.0) < 1e-6);
    assert_eq!(cell(&scalars, "phi"), "0");
    assert_eq!(cell(&side, "meroi"), "1");
    assert_eq!(cell(&side, "binding_constraint"), "none");

    for f in ["demand.csv", "demand_scalars.csv", "meec_grain.csv", "figure1_grain.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "equilibrium");
    assert_eq!(manifest["digest"].as_str().unwrap().len(), 64);
    assert!(manifest["outputs"].as_array().unwrap().iter().any(|v| v == "figure1_grain.svg"));
}

#[test]
fn csv_uses_lf_and_plain_decimals() {
    let dir = tempfile::tempdir().unwrap();
    let r = egl(&["equilibrium", "--scenario", s(&scenario("cd1.json")), "--out", s(dir.path())]);
    assert_eq!(r.status.code(), Some(0));
    let meec = fs::read_to_string(dir.path().join("meec_grain.csv")).unwrap();
    assert!(!meec.contains('\r'));
    assert!(meec.ends_with('\n'));
    assert_eq!(meec.lines().next().unwrap(), "Q,gamma,gamma_avg,G,eta");
    // γ = 2Q on CD-1 at every sampled point
    for line in meec.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - 2.0 * v[0]).abs() <= 1e-11 * v[1].max(1.0), "{line}");
    }
}

#[test]
fn invalid_scenario_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(scenario("cd1.json")).unwrap()).unwrap();
    doc["energy_goods"][0]["energy_content"] = (-1.0).into();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, doc.to_string()).unwrap();
    let r = egl(&["equilibrium", "--scenario", s(&bad), "--out", s(&dir.path().join("o"))]);
    assert_eq!(r.status.code(), Some(1));
    let e = error_line(&r);
    assert_eq!(e["exit_code"], 1);
    assert!(e["field"].as_str().unwrap().contains("energy_content"), "{e}");
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"horizon\": ,\n}").unwrap();
    let r = egl(&["validate", "--scenario", s(&bad)]);
    assert_eq!(r.status.code(), Some(1));
    assert_eq!(error_line(&r)["line"], 2);
}

#[test]
fn unwritable_out_dir_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let r = egl(&["equilibrium", "--scenario", s(&scenario("cd1.json")), "--out", s(&blocker.join("sub"))]);
    assert_eq!(r.status.code(), Some(3));
    assert!(error_line(&r)["path"].is_string());
}

#[test]
fn missing_scenario_exits_3() {
    let r = egl(&["validate", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let family = scenario("family_default.json");
    let r = egl(&["statics", "--family", s(&family), "--seed", "1", "--trials", "0", "--out", s(dir.path())]);
    assert_eq!(r.status.code(), Some(1));
    assert_eq!(error_line(&r)["error"], "usage");
    assert_eq!(egl(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(egl(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_log_level_is_a_usage_error() {
    let r = Command::new(env!("CARGO_BIN_EXE_egl"))
        .args(["validate", "--scenario", s(&scenario("cd1.json"))])
        .env("EGL_LOG", "loud")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn validate_prints_digest() {
    let r = egl(&["validate", "--scenario", s(&scenario("cd1.json"))]);
    assert_eq!(r.status.code(), Some(0));
    let stdout = String::from_utf8(r.stdout).unwrap();
    let digest = stdout.lines().next().unwrap().strip_prefix("ok ").unwrap();
    assert_eq!(digest.len(), 64);
}

#[test]
fn horizon_zero_gives_one_record() {
    let dir = tempfile::tempdir().unwrap();
    let r = egl(&[
        "simulate",
        "--scenario",
        s(&scenario("cd1_scarce.json")),
        "--out",
        s(dir.path()),
        "--horizon",
        "0",
    ]);
    assert_eq!(r.status.code(), Some(0));
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let rows: Vec<&str> = traj.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0,"));
}

#[test]
fn scarce_run_marks_steady_state() {
    let dir = tempfile::tempdir().unwrap();
    let r = egl(&["simulate", "--scenario", s(&scenario("cd1_scarce.json")), "--out", s(dir.path())]);
    assert_eq!(r.status.code(), Some(0));
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(traj.lines().any(|l| l.starts_with("# steady_state period=")));
    let svg = fs::read_to_string(dir.path().join("figure2.svg")).unwrap();
    assert!(svg.contains("ζ"));
}

#[test]
fn period_failure_writes_partial_trajectory_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(scenario("cd1_scarce.json")).unwrap()).unwrap();
    doc["events"] = serde_json::json!([
        {"kind": "endowment_shock", "period": 4, "mover": "worker", "delta": -100.0}
    ]);
    let path = dir.path().join("shock.json");
    fs::write(&path, doc.to_string()).unwrap();
    let out = dir.path().join("o");
    let r = egl(&["simulate", "--scenario", s(&path), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().filter(|l| !l.starts_with('#')).count(), 5);
    assert!(traj.contains("# failed period=4"));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn statics_table_has_three_rows_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let family = scenario("family_default.json");
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let r = egl(&["statics", "--family", s(&family), "--seed", "42", "--trials", "12", "--out", s(&out)]);
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
        fs::read_to_string(out.join("sign_table.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    assert!(a.starts_with("# prng=ChaCha8 seed=42 trials=12"));
    let rows: Vec<&str> = a.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 3);
    for (row, id) in rows.iter().zip(["a", "b", "c"]) {
        assert!(row.starts_with(&format!("{id},12,12,0,")), "{row}");
    }
}

#[test]
fn svg_outputs_are_self_contained() {
    let dir = tempfile::tempdir().unwrap();
    egl(&["equilibrium", "--scenario", s(&scenario("cd1_scarce.json")), "--out", s(dir.path())]);
    let svg = fs::read_to_string(dir.path().join("figure1_grain.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("href"));
    assert!(!svg.contains("NaN") && !svg.contains("inf"));
}
