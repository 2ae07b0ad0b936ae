use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).display().to_string()
}

fn oneloop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oneloop")).args(args).env_remove("ONELOOP_FIELD").output().expect("runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn temp_file(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("oneloop-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn validate_fixture() {
    let out = oneloop(&["validate", &fixture("fig8.tri"), "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("2 tetrahedra, 2 edge classes, 4 face classes, 12 short-edge classes"));
    assert!(text.contains("ptolemy: satisfied"));
}

#[test]
fn validation_failures() {
    let empty = temp_file("empty.tri", "");
    let out = oneloop(&["validate", &empty]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["message"].as_str().unwrap().contains("line 1, column 1"));

    let broken = temp_file("broken.tri", "tetrahedra 2\nglue 0 0 -> 1 2\nglue 0 1 -> 1 2\n");
    let out = oneloop(&["validate", &broken]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "validation");
}

#[test]
fn usage_failures() {
    assert_eq!(oneloop(&["validate", "/nonexistent/file.tri"]).status.code(), Some(3));
    assert_eq!(oneloop(&["oneloop", &fixture("fig8.tri"), "--field", "quadratic:4"]).status.code(), Some(3));
    assert_eq!(oneloop(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(oneloop(&["oneloop", &fixture("fig8.tri"), "--solve"]).status.code(), Some(3));
    assert_eq!(oneloop(&["oneloop", &fixture("fig8.tri"), "--edge-choice", "00,12"]).status.code(), Some(3));
    assert_eq!(oneloop(&["--help"]).status.code(), Some(0));
}

#[test]
fn exact_polynomial() {
    let out = oneloop(&["oneloop", &fixture("fig8.tri"), "--twist"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["delta_t"], serde_json::json!({"0": "1", "1": "-4", "2": "1"}));
    assert_eq!(v["field"], "quadratic:-3");
}

#[test]
fn exact_output_is_deterministic() {
    let args = ["oneloop", &fixture("fig8.tri"), "--twist", "--edge-choice", "03,12"];
    assert_eq!(oneloop(&args).stdout, oneloop(&args).stdout);
}

#[test]
fn solved_polynomial_matches() {
    let out = oneloop(&["oneloop", &fixture("fig8.tri"), "--twist", "--field", "complex:256", "--solve"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["ptolemy_residual"].as_f64().unwrap() < 1e-30);
    for (k, want) in [("0", 1.0), ("1", -4.0), ("2", 1.0)] {
        let got: f64 = v["delta_t"][k].as_str().unwrap().parse().unwrap();
        assert!((got - want).abs() < 1e-12, "{v}");
    }
}

#[test]
fn twist_needs_weights() {
    let text = std::fs::read_to_string(fixture("fig8.tri")).unwrap();
    let stripped: String = text.lines().filter(|l| !l.starts_with("faceweight")).map(|l| format!("{l}\n")).collect();
    let path = temp_file("noweights.tri", &stripped);
    let out = oneloop(&["oneloop", &path, "--twist"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["message"].as_str().unwrap().contains("face weights"));
    assert_eq!(oneloop(&["oneloop", &path]).status.code(), Some(0));
}

#[test]
fn field_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_oneloop"))
        .args(["oneloop", &fixture("fig8.tri")])
        .env("ONELOOP_FIELD", "rational")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["message"].as_str().unwrap().contains("not an element of the field"));
}

#[test]
fn kernel_at_singular_point() {
    let out = oneloop(&["kernel", &fixture("fig8_singular.tri"), "--edge-choice", "03,12"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["delta"], "0");
    assert_eq!(v["dimension"], 2);
    let generic = json(&oneloop(&["kernel", &fixture("fig8.tri")]));
    assert_eq!(generic["dimension"], 0);
}

#[test]
fn cocycle_reports() {
    let v = json(&oneloop(&["cocycle", &fixture("fig8.tri")]));
    assert_eq!(v["ok"], true);
    assert_eq!(v["theta_zero"], true);
    let out = oneloop(&["cocycle", &fixture("fig8_singular.tri"), "--lift"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["theta_zero"], false);
    assert_eq!(v["violations"], serde_json::json!([]));
    assert_eq!(v["non_osp"], serde_json::json!([]));
    assert_eq!(v["holonomy"]["meridian"][1][0], "0");
    assert_eq!(oneloop(&["cocycle", &fixture("fig8.tri"), "--lift"]).status.code(), Some(1));
}

#[test]
fn pachner_check() {
    let out = oneloop(&["pachner", "check", &fixture("fig8.tri"), "--tets", "0,1", "--face", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["invariant"], true);
    assert_eq!(v["before"], v["after"]);
    assert_eq!(oneloop(&["pachner", "check", &fixture("fig8.tri"), "--tets", "0,0", "--face", "2"]).status.code(), Some(3));
    assert_eq!(oneloop(&["pachner", "check", &fixture("fig8.tri"), "--tets", "0", "--face", "2"]).status.code(), Some(3));
}

#[test]
fn deformed_pachner_check() {
    let out = oneloop(&[
        "pachner", "check", &fixture("fig8.tri"), "--field", "complex:256", "--solve", "--param", "m=2", "--free", "l",
        "--guess", "1=1/2+9/10*sqrt(-1)", "--tets", "1,0", "--face", "0", "--deformed",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["invariant"], true);
}

#[test]
fn solve_reports_parameters() {
    let out = oneloop(&[
        "solve", &fixture("fig8.tri"), "--field", "complex:128", "--param", "m=2", "--free", "l", "--guess",
        "1=1/2+9/10*sqrt(-1)",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["solver"]["residual"].as_f64().unwrap() < 1e-30);
    assert!(v["parameters"]["l"].is_string());
    assert_eq!(oneloop(&["solve", &fixture("fig8.tri")]).status.code(), Some(3));
}

#[test]
fn selfcheck_passes() {
    let out = oneloop(&["selfcheck", "--seed", "7", "--cases", "25"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["failures"], serde_json::json!([]));
}
