use std::path::PathBuf;
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn raysinger(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_raysinger")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

#[test]
fn algebra_suite_passes() {
    let o = raysinger(&["suite", "algebra", "--seed", "42"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("5/5 checks passed"));
}

#[test]
fn unknown_suite_is_rejected() {
    let o = raysinger(&["suite", "geometry"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
}

#[test]
fn tolerance_scale_can_fail_a_suite() {
    let o = raysinger(&["asymp", "verify", "--n", "2", "--degree", "4", "--trials", "2", "--tolerance-scale", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn reports_differ_only_in_the_run_header() {
    for format in ["json", "csv", "text"] {
        let args = ["localindex", "consistency", "--trials", "2", "--seed", "9", "--format", format];
        let a = stdout(&raysinger(&args));
        let b = stdout(&raysinger(&args));
        let strip = |s: &str| {
            s.lines().filter(|l| !l.contains("timestamp") && !l.starts_with("run: ")).collect::<Vec<_>>().join("\n")
        };
        assert_eq!(strip(&a), strip(&b), "{format}");
        assert_eq!(a.lines().count(), b.lines().count());
    }
}

#[test]
fn json_report_parses() {
    let o = raysinger(&["transport", "verify", "--n", "2", "--trials", "3", "--steps", "64", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["suites"][0]["suite"], "transport");
    assert_eq!(v["suites"][0]["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let o = raysinger(&["suite", "algebra", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let s = std::fs::read_to_string(&path).unwrap();
    assert!(s.lines().nth(1).unwrap().starts_with("suite,seed,id,status"));
}

#[test]
fn euler_of_exact_matrix() {
    let o = raysinger(&["chernweil", "euler", "--input", &config("skew_exact.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let want = 3.0 / (8.0 * std::f64::consts::PI.powi(2));
    assert!((v["value"].as_f64().unwrap() - want).abs() < 1e-15);
    assert_eq!(v["exact"], "3/8·π^{-4/2}");
}

#[test]
fn euler_and_transgression_of_curvature() {
    let o = raysinger(&["chernweil", "euler", "--input", &config("curvature_unit_sphere.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.5 / std::f64::consts::PI).abs() < 1e-15);
    let o =
        raysinger(&["chernweil", "transgression", "--input", &config("transgression_pair.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.25 / std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn fixed_point_rhs() {
    let o = raysinger(&[
        "localindex",
        "rhs",
        "--case",
        "hF",
        "--input",
        &config("fixed_points_reflection.json"),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.2).abs() < 1e-12);
}

#[test]
fn spectral_circle_writes_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("rep.json");
    let table = dir.path().join("conv.csv");
    let o = raysinger(&[
        "spectral",
        "circle",
        "--config",
        &config("circle_reflection.json"),
        "--gamma",
        "reflection",
        "--vary",
        "hF",
        "--n",
        "256",
        "--convergence",
        "32,64,128",
        "--report",
        rep.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(v["gamma"], "reflection");
    assert!((v["rhs"].as_f64().unwrap() - 1.2).abs() < 1e-9);
    assert_eq!(v["convergence"].as_array().unwrap().len(), 3);
    assert_eq!(std::fs::read_to_string(&table).unwrap().lines().count(), 4);
}

#[test]
fn spectral_torus_minus_id() {
    let o = raysinger(&["spectral", "torus", "--config", &config("torus_minus_id.json"), "--gamma", "-id", "--n", "8"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn malformed_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let o = raysinger(&["suite", "spectral", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
