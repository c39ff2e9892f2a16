use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wavered(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavered")).args(args).env_remove("WAVERED_SEED").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn catalog_entries_verify() {
    let o = wavered(&["verify-ansatz", "catalog:1"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("case: hyperbolic"));
    let o = wavered(&["verify-ansatz", "catalog:3", "--phi", "square"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("case: elliptic"));
    let o = wavered(&["verify-ansatz", "catalog:4", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["case"]["case"], "parabolic");
    assert_eq!(v["case"]["lambda"], -1);
    assert_eq!(v["outcome"], "pass");
}

#[test]
fn product_ansatz_prints_witness_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "prod.json", r#"{"y": "x0*x1", "z": "x2"}"#);
    let o = wavered(&["verify-ansatz", &spec]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("r: not a function of (y, z)"), "{out}");
    assert!(out.contains("result: fail"));
}

#[test]
fn claimed_reduction_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", r#"{"r": "1", "q": "0", "s": "-1", "R": "0", "S": "-2/z"}"#);
    let bad = write(dir.path(), "bad.json", r#"{"r": "1", "q": "0", "s": "-1", "R": "0", "S": "-1/z"}"#);
    assert_eq!(code(&wavered(&["verify-ansatz", "catalog:2", "--claimed", &good])), 0);
    let o = wavered(&["verify-ansatz", "catalog:2", "--claimed", &bad]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("S = -1/z: fails"));
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&wavered(&["verify-ansatz", "catalog:7"])), 2);
    let broken = write(dir.path(), "broken.json", r#"{"y": "x0 +", "z": "x1"}"#);
    assert_eq!(code(&wavered(&["verify-ansatz", &broken])), 2);
    assert_eq!(code(&wavered(&["verify-ansatz", "missing.json"])), 2);
    assert_eq!(code(&wavered(&["solve", "wave1p1", "--F", "sin("])), 2);
    assert_eq!(code(&wavered(&["no-such-command"])), 2);
    let frame = write(dir.path(), "frame.json", r#"{"a": [1,0,0,0], "b": [0,2,0,0], "c": [0,0,1,0], "d": [0,0,0,1]}"#);
    let o = wavered(&["verify-ansatz", "catalog:1", "--frame", &frame]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bb != -1"));
}

#[test]
fn boosted_frame_file_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let (c, s) = (0.5f64.cosh(), 0.5f64.sinh());
    let frame = write(
        dir.path(),
        "frame.json",
        &format!(r#"{{"a": [{c}, {s}, 0, 0], "b": [{s}, {c}, 0, 0], "c": [0, 0, 1, 0], "d": [0, 0, 0, 1]}}"#),
    );
    let o = wavered(&["verify-ansatz", "catalog:1", "--frame", &frame]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn compat_examples() {
    let dir = tempfile::tempdir().unwrap();
    let e = write(dir.path(), "e.json", r#"{"kind": "elliptic", "h": "1", "V": "1/vs", "n": 3}"#);
    let o = wavered(&["check-compat", &e, "--phi", "vs"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("step 4: 0"));
    assert_eq!(code(&wavered(&["check-compat", &e, "--phi", "vs", "--n", "0"])), 2);
    let sq = write(dir.path(), "sq.json", r#"{"kind": "elliptic", "h": "1", "V": "2/vs", "n": 1}"#);
    assert_eq!(code(&wavered(&["check-compat", &sq, "--phi", "vs^2"])), 1);
    assert_eq!(code(&wavered(&["check-compat", &sq, "--phi", "vs^2", "--n", "2"])), 0);

    let p = write(dir.path(), "p.json", r#"{"kind": "parabolic", "lambda": -1, "V": "0", "W": "v", "n": 2}"#);
    let o = wavered(&["check-compat", &p, "--phi", "1"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("W = 0: fails"));

    let f = write(dir.path(), "f.json", r#"{"kind": "first_order", "V": "0", "W": "0"}"#);
    assert_eq!(code(&wavered(&["check-compat", &f])), 0);
    assert_eq!(code(&wavered(&["check-compat", &e])), 2);
}

#[test]
fn compat_json_carries_the_chain() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "h.json", r#"{"kind": "hyperbolic", "h": "1", "V": "1/w", "W": "2/v", "n": 1}"#);
    let o = wavered(&["check-compat", &h, "--phi", "w", "--psi", "v^2", "--json"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "necessary condition violated");
    let chain = v["conditions"][2]["certificate"]["chain"].as_array().unwrap();
    assert_eq!(chain.len(), 3);
    assert_eq!(chain[2], "2");
}

#[test]
fn solve_wave_to_stdout() {
    let o = wavered(&["solve", "wave1p1", "--F", "sin(phi)", "--init", "kink", "--T", "1"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("y,z,phi"));
    assert_eq!(lines.count(), 101 * 1001);
}

#[test]
fn radial_ode_gives_log_table() {
    let o = wavered(&["solve", "radial-ode", "--F", "0", "--y0", "1", "--phi0", "0", "--dphi0", "1"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut rows = 0;
    for line in out.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - cols[0].ln()).abs() < 1e-8, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 901);
}

#[test]
fn grid_round_trip_through_lift() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("kink.csv");
    let csv = csv.to_str().unwrap();
    let o = wavered(&["solve", "wave1p1", "--F", "sin(phi)", "--z-min", "-6", "--z-max", "6", "--out", csv]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("kink.json").exists());
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"y": "x0", "z": "-x3", "domain": {"min": [0.2, -2, -2, -2], "max": [0.8, 2, 2, 2]}}"#,
    );
    let o = wavered(&["lift", "--ansatz", &spec, "--grid", csv, "--F", "sin(u)"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    // the default box leaves the grid for most samples
    let o = wavered(&["lift", "--ansatz", "catalog:1", "--grid", csv, "--F", "sin(u)"]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
}

#[test]
fn kink_lift_is_tiny() {
    let o = wavered(&["lift", "--ansatz", "catalog:1", "--closed-form", "kink", "--F", "sin(u)", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["report"]["max"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["report"]["samples_used"], 500);
    let o = wavered(&["lift", "--closed-form", "kink", "--F", "cos(u)"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn demos_pass() {
    for demo in ["kink", "liouville"] {
        let o = wavered(&["lift", "--demo", demo]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
    }
}

#[test]
fn reports_are_reproducible() {
    let args = ["lift", "--closed-form", "liouville", "--json", "--seed", "7", "--threads", "2"];
    let a = wavered(&args);
    let b = wavered(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = wavered(&["lift", "--closed-form", "liouville", "--json", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
    let d = Command::new(env!("CARGO_BIN_EXE_wavered"))
        .args(["lift", "--closed-form", "liouville", "--json"])
        .env("WAVERED_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(a.stdout, d.stdout);
}
