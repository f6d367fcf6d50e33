//! End-to-end runs of the `weierstrass-lab` binary on the shipped configs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_weierstrass-lab"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("weierstrass-lab-test-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(config: &Path, out: &Path) -> i32 {
    let status = bin().arg("run").arg(config).arg("--out").arg(out).args(["--log", "warn"]).status().unwrap();
    status.code().unwrap()
}

fn summary(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn shipped_configs_pass() {
    let mut names: Vec<_> = fs::read_dir(configs()).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    assert!(names.len() >= 6);
    for config in names {
        let stem = config.file_stem().unwrap().to_string_lossy().into_owned();
        let out = scratch(&stem);
        assert_eq!(run(&config, &out), 0, "{stem}");
        let s = summary(&out);
        assert_eq!(s["passed"], true, "{stem}");
        assert_eq!(s["schema_version"], 1);
        for table in s["tables"].as_array().unwrap() {
            assert!(out.join(table["file"].as_str().unwrap()).exists());
            for column in table["columns"].as_array().unwrap() {
                assert!(!column["provenance"].as_str().unwrap().is_empty(), "{stem}: {column}");
            }
        }
        fs::remove_dir_all(&out).unwrap();
    }
}

#[test]
fn malformed_expression_is_reported() {
    let dir = scratch("malformed");
    fs::create_dir_all(&dir).unwrap();
    let config = dir.join("bad.json");
    fs::write(&config, r#"{ "scenario": "catenoid", "g": "z +* 2" }"#).unwrap();
    let out = dir.join("out");
    assert_ne!(run(&config, &out), 0);
    let s = summary(&out);
    assert_eq!(s["passed"], false);
    assert!(s["error"].as_str().unwrap().contains("g"), "{}", s["error"]);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unknown_scenario_fails() {
    let dir = scratch("unknown");
    fs::create_dir_all(&dir).unwrap();
    let config = dir.join("bad.json");
    fs::write(&config, r#"{ "scenario": "gyroid" }"#).unwrap();
    assert_ne!(run(&config, &dir.join("out")), 0);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn runs_are_deterministic() {
    let config = configs().join("catenoid.json");
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    assert_eq!(run(&config, &a), 0);
    assert_eq!(run(&config, &b), 0);
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        if name.to_string_lossy().ends_with(".csv") {
            assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
        }
    }
    fs::remove_dir_all(&a).unwrap();
    fs::remove_dir_all(&b).unwrap();
}
