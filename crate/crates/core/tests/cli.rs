//! The `spin7` binary driven as a subprocess.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const KAHLER: &str = r#"{"grade": 2, "terms": [
    {"idx": [1, 2], "c": 1.0}, {"idx": [3, 4], "c": 1.0},
    {"idx": [5, 6], "c": 1.0}, {"idx": [7, 8], "c": 1.0}]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spin7"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn vdim_of_the_trivial_twists() {
    let out = run(&["vdim", "--k", "0", "--l", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["vdim"], -3);
    assert_eq!(v["decomposition"]["dim_cz"], 3);
}

#[test]
fn split_of_the_kahler_form() {
    let out = run_stdin(&["split"], KAHLER);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["p7_norm"], 2.0);
    assert_eq!(v["p21_norm"], 0.0);
}

#[test]
fn missing_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing.json");
    let out = run(&["index", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_input_names_the_field() {
    let out = run_stdin(&["index"], r#"{"rank": 2, "c2_sq": "many"}"#);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("c2_sq"));
    let out = run_stdin(&["index"], r#"{"rank": 2, "c5": 1}"#);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("c5"));
}

#[test]
fn index_reads_characteristic_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chern.json");
    std::fs::write(&path, r#"{"rank": 2, "p1_c2": -8, "c2_sq": 1}"#).unwrap();
    let v = json(&run(&["index", "--file", path.to_str().unwrap()]));
    assert_eq!(v["index_su"], -3);
    assert_eq!(v["index_u"], -4);
}

#[test]
fn output_is_deterministic() {
    for args in [&["forms"][..], &["group", "--convention", "II"], &["solve", "--seed", "4", "--max-steps", "50"]] {
        let a = run(args);
        let b = run(args);
        let c = bin().args(args).env_clear().output().unwrap();
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stdout, c.stdout, "{args:?}");
    }
}

#[test]
fn gluing_scan_writes_only_the_requested_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = bin()
        .current_dir(dir.path())
        .args(["gluing-scan", "--norm", "l8curv", "--samples", "5", "--csv", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert_eq!(json(&out)["pass"], true);
}

#[test]
fn solve_writes_a_readable_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.bin");
    let out = run(&["solve", "--seed", "1", "--field-out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["converged"], true);
    let field = spin7::lattice::read_field(&path, 1.0).unwrap();
    let spec = field.spec();
    let e = spin7::lattice::energy(spec, &field).unwrap();
    let last = report["energy_history"].as_array().unwrap().last().unwrap().as_f64().unwrap();
    assert!((e - last).abs() <= 1e-12 * last.max(1e-300) + 1e-300);
}

#[test]
fn help_lists_the_flags() {
    let out = run(&["solve", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--n", "--group", "--seed", "--method", "--field-out"] {
        assert!(text.contains(flag), "{flag}");
    }
    assert_eq!(run(&["solve", "--bogus"]).status.code(), Some(2));
}

#[test]
fn selfcheck_subset_passes() {
    let out = run(&["selfcheck", "--only", "1,2,3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 3);
}
