use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superyang")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn passing_suite_exits_zero() {
    let out = run(&["verify", "-M", "1", "-N", "2", "-D", "3", "--suite", "tensor-lemmas"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("PASS tensor-lemmas/yang-baxter"));
    assert!(text.lines().last().unwrap().starts_with("8 passed, 0 failed"));
}

#[test]
fn odd_n_with_twisted_suite_is_a_config_error() {
    let out = run(&["verify", "-M", "1", "-N", "3", "--suite", "twisted-relations"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("even N"));
}

#[test]
fn unknown_suite_and_oversized_shape_are_config_errors() {
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "-M", "3", "-N", "4", "--suite", "rtt"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "-D", "9", "--suite", "rtt"]).status.code(), Some(2));
}

#[test]
fn failing_identity_is_reported_not_hidden() {
    let out = run(&["verify", "-M", "1", "-N", "2", "-D", "2", "--suite", "sylvester"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL sylvester/sylvester"));
    assert!(text.contains("PASS sylvester/psi-via-varpi"));
}

#[test]
fn json_report_round_trips() {
    let out = run(&["verify", "-M", "1", "-N", "2", "-D", "2", "--suite", "rtt", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["config"]["M"], 1);
    assert_eq!(value["config"]["mode"], "strict");
    let checks = value["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|c| c["status"] == "pass" && c["mismatch"].is_null()));
    let again = serde_json::to_string(&value).unwrap();
    assert_eq!(serde_json::from_str::<serde_json::Value>(&again).unwrap(), value);
}

#[test]
fn reports_without_timings_are_reproducible() {
    let args = ["verify", "-M", "1", "-N", "2", "-D", "2", "--suite", "center", "--suite", "rtt", "--workers", "2", "--no-timings", "--output", "json"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn zero_budget_skips_everything() {
    let out = run(&["verify", "--suite", "rtt", "--budget-seconds", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("0 passed, 0 failed, 3 skipped"));
}

#[test]
fn central_series_has_trivial_counit() {
    let out = run(&["compute", "z", "-M", "1", "-N", "2", "-D", "3", "--counit"]);
    assert_eq!(stdout(&out).trim(), "1");
}

#[test]
fn twisted_central_series_starts_at_order_three() {
    let out = run(&["compute", "z-tw", "-M", "1", "-N", "2", "-D", "3"]);
    let text = stdout(&out);
    assert!(text.starts_with("1 + ("));
    assert!(!text.contains("u^-1") && !text.contains("u^-2"));
    assert!(text.trim_end().ends_with("u^-3"));
}

#[test]
fn berezinian_first_coefficient() {
    let out = run(&["compute", "berezinian", "-M", "1", "-N", "2", "-D", "1"]);
    assert_eq!(stdout(&out).trim(), "1 + (t[1,1,1] - t[2,2,1] - t[3,3,1])*u^-1");
}

#[test]
fn minor_with_mismatched_indices_is_rejected() {
    let out = run(&["compute", "minor", "--upper", "1,3", "--lower", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
