use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (Value, bool) {
    let out = Command::new(env!("CARGO_BIN_EXE_treeshift"))
        .args(args)
        .output()
        .unwrap();
    (serde_json::from_slice(&out.stdout).unwrap(), out.status.success())
}

#[test]
fn ball_count_is_seventeen() {
    let (v, ok) = run(&["ball", "--n", "3", "--count"]);
    assert!(ok);
    assert_eq!(v["payload"]["count"], 17);
    assert_eq!(v["status"], "ok");
}

#[test]
fn errors_exit_nonzero_with_json() {
    let (v, ok) = run(&["ict", "--points", "example:nope", "--epsilon", "2^-3", "--depth", "4"]);
    assert!(!ok);
    assert_eq!(v["status"], "error");
}

#[test]
fn refutation_is_a_success() {
    let (v, ok) = run(&[
        "cict",
        "--points",
        "example:ict-not-cict",
        "--epsilon",
        "2^-3",
        "--depth",
        "4",
    ]);
    assert!(ok);
    assert_eq!(v["status"], "refuted");
}

#[test]
fn printed_points_read_back() {
    let (v, _) = run(&["example", "golden-mean-monoid"]);
    let points = v["payload"]["points"].to_string();
    let system = v["payload"]["system"].to_string();
    let (r, ok) = run(&["cict", "--points", &points, "--epsilon", "2^-2", "--depth", "3"]);
    assert!(ok, "{r}");
    let (r, ok) = run(&[
        "realize",
        "--mode",
        "cict",
        "--points",
        &points,
        "--system",
        &system,
        "--resolution",
        "2^-3",
    ]);
    assert!(ok, "{r}");
    assert_eq!(r["status"], "ok");
}
