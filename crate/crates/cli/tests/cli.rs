use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_octodecomp");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("OCTODECOMP_BLOCK_DATA").output().unwrap()
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("octodecomp-{}-{name}", std::process::id()))
}

#[test]
fn build_then_verify() {
    let built = run(&["build", "--family", "tensor", "-m", "4", "-n", "4", "-p", "9", "-q", "0"]);
    assert_eq!(code(&built), 0);
    let checked = run_with_stdin(&["verify"], &built.stdout);
    assert_eq!(code(&checked), 0);
    let report: serde_json::Value = serde_json::from_slice(&checked.stdout).unwrap();
    assert_eq!(report["valid"], true);

    let path = scratch("cert.json");
    let out = run(&["build", "--family", "wreath", "-m", "5", "-n", "2", "-p", "2", "-q", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    assert_eq!(code(&run(&["verify", path.to_str().unwrap()])), 0);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn tampered_certificates_fail_verification() {
    let built = run(&["build", "--family", "tensor", "-m", "4", "-n", "4", "-p", "8", "-q", "1"]);
    let mut cert: serde_json::Value = serde_json::from_slice(&built.stdout).unwrap();
    cert["parts"].as_array_mut().unwrap().pop();
    let out = run_with_stdin(&["verify", "-"], cert.to_string().as_bytes());
    assert_eq!(code(&out), 1);
    assert_eq!(code(&run_with_stdin(&["verify"], b"not json")), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["feasible", "--family", "tensor", "-m", "3", "-n", "3"])), 1);
    assert_eq!(code(&run(&["feasible", "--family", "tensor", "-m", "4", "-n", "4"])), 0);
    assert_eq!(code(&run(&["build", "--family", "tensor", "-m", "4", "-n", "4", "-p", "7", "-q", "2"])), 1);
    assert_eq!(code(&run(&["build", "--family", "wreath", "-m", "16", "-n", "3", "-p", "0", "-q", "45"])), 2);
    assert_eq!(code(&run(&["build", "--family", "ring", "-m", "4", "-n", "4", "-p", "0", "-q", "9"])), 3);
    assert_eq!(code(&run(&["build", "--family", "tensor", "-m", "4"])), 3);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn feasibility_report_is_json() {
    let out = run(&["feasible", "--family", "wreath", "-m", "5", "-n", "2"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["edges"], 40);
    assert_eq!(report["parity_floor"], 0);
}

#[test]
fn oracle_commands() {
    let out = run(&["oracle", "--block", "c4xk3", "--enumerate"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["complete"], true);
    assert_eq!(report["feasible"], serde_json::json!([[0, 3], [2, 1], [3, 0]]));
    assert_eq!(code(&run(&["oracle", "--block", "c4xk3", "-p", "1", "-q", "2"])), 1);
    assert_eq!(code(&run(&["oracle", "--block", "k46", "-p", "0", "-q", "3", "--budget-nodes", "2"])), 2);
    assert_eq!(code(&run(&["oracle", "--block", "c4xk3", "-p", "3", "-q", "0"])), 0);
}

#[test]
fn block_data_override() {
    assert_eq!(code(&run(&["blocks", "check", "--id", "k88"])), 0);
    let data = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/blocks.json")).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&data).unwrap();
    json["blocks"].as_array_mut().unwrap().retain(|b| b["id"] != "k88");
    let path = scratch("blocks.json");
    std::fs::write(&path, json.to_string()).unwrap();
    let listed = Command::new(BIN).args(["blocks", "list"]).env("OCTODECOMP_BLOCK_DATA", &path).output().unwrap();
    assert_eq!(code(&listed), 0);
    let text = String::from_utf8(listed.stdout).unwrap();
    assert!(!text.contains("\"id\":\"k88\"") && text.contains("\"id\":\"k4xk4\""));
    let missing = Command::new(BIN).args(["blocks", "check", "--id", "k88"]).env("OCTODECOMP_BLOCK_DATA", &path).output().unwrap();
    assert_eq!(code(&missing), 3);
    std::fs::remove_file(path).unwrap();
}
