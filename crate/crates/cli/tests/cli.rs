use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> String {
    root().join("fixtures").join(name).display().to_string()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(root().join("fixtures/golden").join(name)).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsp-dqes"))
        .args(["--log-level", "warn"])
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

#[test]
fn outputs_match_goldens() {
    let cases: [(&[&str], &str); 9] = [
        (&["solve", &fixture("landscape.json"), "--no-timestamp"], "solve_landscape.json"),
        (&["solve", &fixture("counter_example.txt"), "--no-timestamp"], "solve_counter_example.json"),
        (&["audit", &fixture("counter_example.txt"), "--no-timestamp"], "audit_counter_example.json"),
        (
            &["audit", &fixture("counter_example.txt"), "--penalties", "safe", "--no-timestamp"],
            "audit_counter_example_safe.json",
        ),
        (
            &["encode", &fixture("landscape.txt"), "--layout", "efficient", "--form", "ising", "--no-timestamp"],
            "encode_landscape_efficient_ising.json",
        ),
        (
            &["encode", &fixture("counter_example.txt"), "--layout", "full", "--form", "binary", "--no-timestamp"],
            "encode_counter_example_full_binary.json",
        ),
        (&["spectrum", &fixture("landscape.txt")], "spectrum_landscape.csv"),
        (&["spectrum", &fixture("landscape.txt"), "--format", "json", "--no-timestamp"], "spectrum_landscape.json"),
        (&["landscape", &fixture("landscape.txt")], "landscape.csv"),
    ];
    for (args, name) in cases {
        assert_eq!(stdout(args), golden(name), "{name}");
    }
}

#[test]
fn json_and_edge_list_fixtures_agree() {
    for name in ["landscape", "counter_example"] {
        let a = stdout(&["solve", &fixture(&format!("{name}.json")), "--no-timestamp"]);
        let b = stdout(&["solve", &fixture(&format!("{name}.txt")), "--no-timestamp"]);
        assert_eq!(a, b);
    }
}

#[test]
fn encode_variable_counts() {
    let v = json(&["encode", &fixture("landscape.json"), "--no-timestamp"]);
    assert_eq!(v["variables"], 9);
    assert_eq!(v["form"], "ising");
    let v = json(&["encode", &fixture("counter_example.json"), "--layout", "full", "--form", "binary"]);
    assert_eq!(v["variables"], 16);
    assert!(v["generated_at"].is_u64());
}

#[test]
fn solve_reports() {
    let v = json(&["solve", &fixture("landscape.txt")]);
    assert_eq!(v["optimal_cost"], 13);
    assert_eq!(v["tours"].as_array().unwrap().len(), 2);
    let v = json(&["solve", &fixture("counter_example.txt")]);
    assert_eq!(v["optimal_cost"], 22);
    let v = json(&["solve", &fixture("no_cycle.txt")]);
    assert_eq!(v["message"], "no valid tour");
    assert!(v["optimal_cost"].is_null());
}

#[test]
fn audit_verdicts() {
    let v = json(&["audit", &fixture("counter_example.txt")]);
    assert_eq!((v["minimum"].clone(), v["verdict"].clone()), (14.into(), "INVALID".into()));
    let v = json(&["audit", &fixture("counter_example.txt"), "--penalties", "explicit", "41", "1"]);
    assert_eq!(v["verdict"], "VALID");
    assert_eq!(v["minimum"], 22);
    let v = json(&["audit", &fixture("complete4.txt"), "--penalties", "lucas"]);
    assert_eq!(v["verdict"], "VALID");
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code();
    let bad = run(&["solve", &fixture("bad.txt")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 3"));
    assert_eq!(code(&["solve", &fixture("missing.txt")]), Some(2));
    assert_eq!(code(&["encode", &fixture("landscape.txt"), "--layout", "diagonal"]), Some(2));
    assert_eq!(code(&["audit", &fixture("landscape.txt"), "--penalties", "explicit", "1"]), Some(2));
    assert_eq!(code(&["vqe", &fixture("landscape.txt"), "--init", "random"]), Some(2));
    assert_eq!(code(&["vqe", &fixture("no_cycle.txt")]), Some(2));
    assert_eq!(code(&["audit", &fixture("landscape.txt"), "--cap", "10"]), Some(3));
    assert_eq!(code(&["spectrum", &fixture("landscape.txt"), "--cap", "8"]), Some(3));
    assert_eq!(code(&["frobnicate"]), Some(2));
}

#[test]
fn vqe_zeros_report() {
    let v = json(&["vqe", &fixture("landscape.txt"), "--init", "zeros", "--seed", "2", "--no-timestamp"]);
    assert_eq!(v["runs_total"], 1);
    assert_eq!(v["converged_count"], 1);
    assert_eq!(v["optimal_cost"], 13);
    assert_eq!(v["runs"][0]["decoded"]["tour"]["cost"], 13);
    assert!(v.get("generated_at").is_none());
}

#[test]
fn vqe_is_deterministic() {
    let args = ["vqe", &fixture("landscape.txt"), "--init", "random", "3", "--seed", "5", "--max-evals", "300", "--no-timestamp"];
    assert_eq!(stdout(&args), stdout(&args));
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "2"]);
    assert_eq!(stdout(&args), stdout(&threaded));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("landscape.csv");
    let out = run(&["landscape", &fixture("landscape.txt"), "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap(), golden("landscape.csv"));
}

#[test]
fn help_lists_commands_and_defaults() {
    let help = stdout(&["--help"]);
    for command in ["encode", "solve", "audit", "landscape", "vqe", "spectrum"] {
        assert!(help.contains(command), "{command}");
    }
    let vqe = stdout(&["vqe", "--help"]);
    for flag in ["--init", "--seed", "--layers", "--max-evals", "--threads", "--no-timestamp", "[default: 2000]"] {
        assert!(vqe.contains(flag), "{flag}");
    }
}
