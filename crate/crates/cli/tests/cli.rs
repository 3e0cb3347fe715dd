use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaoskit")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn without_meta(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("meta");
    v
}

#[test]
fn verdicts_map_to_exit_codes() {
    assert_eq!(code(&["analyze", "--system", "mobius", "--property", "li-yorke", "--x", "0", "--y", "1"]), 0);
    assert_eq!(code(&["analyze", "--system", "rotation", "--alpha", "0.41421356", "--property", "sensitivity"]), 1);
    assert_eq!(code(&["analyze", "--system", "shift2", "--property", "devaney", "--depth", "4"]), 0);
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(code(&["analyze", "--system", "tent", "--property", "sensitivity"]), 3);
    assert_eq!(code(&["analyze", "--bogus"]), 3);
    assert_eq!(code(&["verify-examples", "--only", "example-9.9"]), 3);
    assert_eq!(code(&["scrambled", "--L", "20"]), 3);
    assert_eq!(code(&["analyze", "--system", "mobius", "--property", "li-yorke", "--x", "1", "--y", "1"]), 3);
    assert_eq!(code(&["analyze", "--system", "flow", "--property", "sensitivity", "--window", "5,1"]), 3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("cert.json");
    std::fs::write(&cfg, r#"{"system": "mobius", "property": "li-yorke", "x": "0", "y": "1", "horizon": 10}"#).unwrap();
    let c = code(&["analyze", "--config", cfg.to_str().unwrap(), "--horizon", "30", "--out", out.to_str().unwrap()]);
    assert_eq!(c, 0);
    let v = without_meta(&out);
    assert_eq!(v["verdict"], "Verified");
    assert!(v.to_string().contains("30"), "horizon override missing from resolution echo");

    std::fs::write(&cfg, r#"{"system": "mobius", "colour": "red"}"#).unwrap();
    assert_eq!(code(&["analyze", "--config", cfg.to_str().unwrap()]), 3);
}

#[test]
fn certificate_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    assert_eq!(code(&["analyze", "--system", "shift2", "--property", "sensitivity", "--out", out.to_str().unwrap()]), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let cert: chaoskit::Certificate = serde_json::from_str(&text).unwrap();
    let again: Value = serde_json::from_str(&serde_json::to_string(&cert).unwrap()).unwrap();
    assert_eq!(again, serde_json::from_str::<Value>(&text).unwrap());
}

#[test]
fn csv_output() {
    let o = run(&["analyze", "--system", "integer-translation", "--property", "periodic", "--x", "inf", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.lines().count() >= 2, "{s}");
}

#[test]
fn verify_examples_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(code(&["verify-examples", "--out", a.path().to_str().unwrap()]), 0);
    assert_eq!(code(&["verify-examples", "--out", b.path().to_str().unwrap()]), 0);
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 10);
    for n in names {
        let (pa, pb) = (a.path().join(&n), b.path().join(&n));
        if n == "report.json" {
            assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
        } else {
            assert_eq!(without_meta(&pa), without_meta(&pb), "{n:?}");
        }
    }
}

#[test]
fn scrambled_writes_family() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("family.json");
    assert_eq!(code(&["scrambled", "--k", "3", "--depth", "3", "--family-out", fam.to_str().unwrap()]), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(fam).unwrap()).unwrap();
    assert_eq!(v["words"].as_array().unwrap().len(), 8);
}
