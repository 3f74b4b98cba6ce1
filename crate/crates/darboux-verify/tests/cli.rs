//! Command-line contract: exit codes, suite selection, overrides, and
//! report placement.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn list_suites_prints_every_known_name() {
    let out = verify(&["--list-suites"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in darboux_verify::SUITE_NAMES {
        assert!(text.lines().any(|l| l == *name), "missing suite {name:?}");
    }
}

#[test]
fn passing_run_exits_zero_with_json_on_stdout() {
    let scenario = scenario_path("gl3.json");
    let out = verify(&["--scenario", scenario.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(report["suites"][0]["name"], "division");
    assert_eq!(report["env"]["seed"], 42);
}

#[test]
fn failing_tolerance_exits_one() {
    // A second-order stencil at a coarse step cannot meet the 1e-5 bar,
    // so the run must report failure rather than success.
    let scenario = scenario_path("so3.json");
    let out = verify(&[
        "--scenario",
        scenario.to_str().unwrap(),
        "--suite",
        "flow-stencil",
        "--stencil",
        "central2",
        "--eps",
        "0.03",
        "--samples",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_suite_exits_two() {
    let scenario = scenario_path("gl3.json");
    let out = verify(&["--scenario", scenario.to_str().unwrap(), "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn missing_scenario_flag_exits_two() {
    let out = verify(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_scenario_file_exits_two() {
    let out = verify(&["--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dangling_scenario_reference_exits_two() {
    // The leibniz suite resolves named objects; a scenario that declares
    // none of them must fail resolution, not run.
    let dir = std::env::temp_dir();
    let path = dir.join(format!("dangling-{}.json", std::process::id()));
    std::fs::write(
        &path,
        r#"{
            "group": "SO3",
            "chart": { "dim": 3, "bounds": [[-1, 1], [-1, 1], [-1, 1]] },
            "suites": ["leibniz"]
        }"#,
    )
    .expect("write temp scenario");
    let out = verify(&["--scenario", path.to_str().unwrap()]);
    let _ = std::fs::remove_file(&path);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unresolved name"));
}

#[test]
fn sample_override_is_recorded_in_the_report() {
    let scenario = scenario_path("gl3.json");
    let out = verify(&[
        "--scenario",
        scenario.to_str().unwrap(),
        "--samples",
        "7",
        "--seed",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(report["suites"][0]["cases"][0]["samples"], 7);
    assert_eq!(report["env"]["seed"], 9);
}

#[test]
fn out_flag_writes_the_report_and_prints_a_summary() {
    let scenario = scenario_path("gl3.json");
    let dir = std::env::temp_dir();
    let path = dir.join(format!("report-out-{}.json", std::process::id()));
    let out = verify(&[
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).expect("report written");
    let _ = std::fs::remove_file(&path);
    assert!(text.starts_with('{') && text.ends_with('\n'));
    assert!(stdout(&out).contains("pass  division/right-translate"));
}
