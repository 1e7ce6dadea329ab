//! End-to-end tests of the `formkit` binary: exit codes, report determinism,
//! output modes, and the corpus-directory resolution rules.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn formkit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_formkit"))
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus_file(name: &str) -> PathBuf {
    corpus_dir().join(name)
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("formkit-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is a JSON report")
}

#[test]
fn polar_reports_diagonal_phases() {
    let output = formkit()
        .args(["polar", "--input"])
        .arg(corpus_file("diag_sign.json"))
        .arg("--no-timestamp")
        .output()
        .unwrap();
    assert!(output.status.success());
    let report = stdout_json(&output);
    assert_eq!(report["schema"], "formkit/1");
    assert_eq!(report["overall"], "pass");
    assert_eq!(report["outputs"]["isometry"][0][0][0], 1.0);
    assert_eq!(report["outputs"]["isometry"][1][1][0], -1.0);
    assert_eq!(report["outputs"]["modulus"][1][1][0], 3.0);
}

#[test]
fn spec_errors_exit_2() {
    let dir = temp_dir("badspec");
    let path = dir.join("broken.json");
    std::fs::write(&path, "{\"schema\": \"formkit/1\"").unwrap();
    let output = formkit()
        .args(["polar", "--input"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(!output.stderr.is_empty());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_input_file_exits_2() {
    let output = formkit()
        .args(["analyze", "--input", "/nonexistent/path.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn numeric_refusals_exit_3() {
    let dir = temp_dir("numeric");
    let path = dir.join("singular.json");
    std::fs::write(
        &path,
        r#"{"schema": "formkit/1", "kind": "matrix_form",
            "gram": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]],
            "perturbation": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]}"#,
    )
    .unwrap();
    let output = formkit()
        .args(["from-operator", "--input"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("sigma_min") || stderr.contains("not invertible"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn failing_check_exits_1() {
    // A user-supplied perturbation that leaves 0 in the closure of
    // {alpha_n + beta_n} fails the resolvent-hypothesis check.
    let dir = temp_dir("resolvent");
    let path = dir.join("violating.json");
    std::fs::write(
        &path,
        r#"{"schema": "formkit/1", "kind": "diagonal",
            "alpha": {"expr": "n"},
            "beta": {"table": [[-1, 0]], "tail": "zero"},
            "sweep": [4, 8]}"#,
    )
    .unwrap();
    let output = formkit()
        .args(["diagonal", "--input"])
        .arg(&path)
        .arg("--no-timestamp")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "{}", String::from_utf8_lossy(&output.stderr));
    let report = stdout_json(&output);
    assert_eq!(report["overall"], "fail");
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks[0]["name"], "resolvent_hypothesis");
    assert_eq!(checks[0]["verdict"], "fail");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn mismatched_metric_is_inconclusive_exit_0() {
    // A flat metric against a growing symbol violates the representation
    // hypothesis: flagged inconclusive rather than failed.
    let dir = temp_dir("mismatch");
    let path = dir.join("mismatched.json");
    std::fs::write(
        &path,
        r#"{"schema": "formkit/1", "kind": "diagonal",
            "alpha": {"expr": "n"},
            "metric": {"expr": "1"},
            "sweep": [8, 32, 128]}"#,
    )
    .unwrap();
    let output = formkit()
        .args(["diagonal", "--input"])
        .arg(&path)
        .arg("--no-timestamp")
        .output()
        .unwrap();
    assert!(output.status.success());
    let report = stdout_json(&output);
    assert_eq!(report["overall"], "inconclusive");
    let criteria = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "criteria_equivalence")
        .unwrap();
    assert_eq!(criteria["verdict"], "inconclusive");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let run = || {
        formkit()
            .args(["second-rep", "--input"])
            .arg(corpus_file("hermitian_shift.json"))
            .args(["--seed", "7", "--no-timestamp"])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    // The seed is recorded in the report.
    assert_eq!(stdout_json(&a)["seed"], 7);
}

#[test]
fn text_format_and_output_file() {
    let dir = temp_dir("output");
    let out_path = dir.join("report.txt");
    let output = formkit()
        .args(["analyze", "--input"])
        .arg(corpus_file("identity.json"))
        .args(["--format", "text", "--no-timestamp", "--output"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(output.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("overall: pass"));
    assert!(text.contains("semibounded_gamma"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_uses_corpus_env_var() {
    let output = formkit()
        .arg("verify")
        .env("FORMKIT_CORPUS", corpus_dir())
        .args(["--no-timestamp", "--samples", "10", "--dims", "4,8,16"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let report = stdout_json(&output);
    assert_eq!(report["overall"], "pass");
}

#[test]
fn verify_fails_on_poisoned_corpus() {
    let dir = temp_dir("poisoned");
    std::fs::copy(corpus_file("identity.json"), dir.join("identity.json")).unwrap();
    std::fs::write(dir.join("zz_broken.json"), "not json at all").unwrap();
    let output = formkit()
        .args(["verify", "--input"])
        .arg(&dir)
        .args(["--no-timestamp", "--samples", "10"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let report = stdout_json(&output);
    assert_eq!(report["overall"], "fail");
    assert_eq!(report["outputs"]["per_file"]["identity.json"], "pass");
    assert_eq!(report["outputs"]["per_file"]["zz_broken.json"], "fail");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn diagonal_grid_spec_runs() {
    let output = formkit()
        .args(["diagonal", "--input"])
        .arg(corpus_file("grid_rz.json"))
        .args(["--no-timestamp", "--samples", "10"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let report = stdout_json(&output);
    assert_eq!(report["overall"], "pass");
    let names: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"grid_coherence"));
    assert!(names.contains(&"criteria_equivalence"));
}
