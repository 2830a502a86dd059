use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn holderlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holderlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("HOLDERLAB_OUT")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn exponents_inline() {
    let dir = tempfile::tempdir().unwrap();
    let o = holderlab(
        &["exponents", "--class", "p_parabolic", "--p", "3", "--n", "3", "--q", "2", "--r", "inf"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("result.json"));
    assert!((r["result"]["alpha"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!((r["result"]["theta"].as_f64().unwrap() - 2.25).abs() < 1e-12);
    assert!((r["result"]["alpha_time"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn admissible_reports_both_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let o = holderlab(
        &["admissible", "--class", "heat", "--n", "2", "--q", "3", "--r", "4"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let r = json(&dir.path().join("result.json"));
    assert_eq!(r["metrics"]["admissible"], 1.0);
    assert_eq!(r["result"]["verdict"]["evaluated"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(dir.path().join("conditions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn config_errors_exit_2_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = holderlab(&["reproduce", "no-such-experiment"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["summary"]["status"], "config_error");

    let bad = write_config(dir.path(), "bad.json", r#"{"experiment": {"kind": "solve"}, "typo": 1}"#);
    let out = dir.path().join("bad");
    let o = holderlab(&["solve", "--config", &bad], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(out.join("manifest.json").exists());

    let o = holderlab(&["exponents", "--formats", "png"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn assertion_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
            "experiment": {"kind": "exponents"},
            "equation": {"class": "heat", "n": 1},
            "integrability": {"q": 2, "r": 2},
            "assertions": [{"metric": "alpha", "max": 0.4}]
        }"#,
    );
    let o = holderlab(&["exponents", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["summary"]["assertions"][0]["passed"], false);
}

#[test]
fn runtime_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
            "experiment": {"kind": "analyze"},
            "field_path": "missing.hldf",
            "analysis": {"center": [0.5], "t0": 0.1, "theta": {"kind": "explicit", "value": 2}, "base_radius": 0.2, "k_max": 4}
        }"#,
    );
    let o = holderlab(&["analyze", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&dir.path().join("manifest.json"))["summary"]["status"], "runtime_error");
}

#[test]
fn sweep_is_byte_identical_for_a_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = holderlab(&["sweep", "--class", "pme", "--count", "100", "--seed", "42"], d.path());
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["sweep.csv", "result.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let csv = std::fs::read_to_string(a.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 101);
    assert_eq!(json(&a.path().join("manifest.json"))["seed"], 42);
}

#[test]
fn env_var_sets_default_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_holderlab"))
        .args(["reproduce", "heat-admissible"])
        .env("HOLDERLAB_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn solve_then_analyze_saved_field() {
    let dir = tempfile::tempdir().unwrap();
    let solve = write_config(
        dir.path(),
        "solve.json",
        r#"{
            "experiment": {"kind": "solve"},
            "equation": {"class": "heat", "n": 1},
            "initial": {"kind": "heat_mode", "amplitude": 1.0, "modes": [1]},
            "grid": {"dim": 1, "space": [[0, 1]], "nx": 129, "time": [0, 0.05], "nt": 257},
            "reference": {"kind": "heat_separable", "amplitude": 1.0, "modes": [1]},
            "assertions": [{"metric": "linf_error", "max": 1e-3}]
        }"#,
    );
    let o = holderlab(&["solve", "--config", &solve, "--formats", "csv,json,field"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("field.hldf").exists());

    let analyze = write_config(
        dir.path(),
        "analyze.json",
        r#"{
            "experiment": {"kind": "analyze"},
            "field_path": "field.hldf",
            "analysis": {"center": [0.4], "t0": 0.05, "theta": {"kind": "explicit", "value": 2}, "base_radius": 0.2, "k_max": 4, "window": {"kind": "explicit", "k_lo": 1, "k_hi": 4}},
            "assertions": [{"metric": "exponent", "min": 0.9}]
        }"#,
    );
    let out = dir.path().join("analysis");
    let o = holderlab(&["analyze", "--config", &analyze], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(out.join("profile.svg").exists());
    // the finest level is shorter than one time step and gets truncated
    assert_eq!(std::fs::read_to_string(out.join("profile.csv")).unwrap().lines().count(), 5);
}
