use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mfelab_cli::config::{DomainKind, RunConfig};
use mfelab_cli::CliError;
use serde_json::Value;

fn out_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name)
}

fn mfelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfelab")).args(args).output().unwrap()
}

#[test]
fn invalid_hole_exits_with_code_two() {
    let dir = out_dir("bad_hole");
    let out = mfelab(&["branch", "--domain", "annulus", "--hole", "0.9,0,0.5", "--output-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid domain"));

    let out = mfelab(&["classify", "--domain", "annulus", "--hole", "0.1,0", "--output-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = mfelab(&["mesh", "--target-h", "-1", "--output-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes_separate_input_from_numerics() {
    let dir = out_dir("supercritical");
    let out = mfelab(&["bol", "--rho", "30", "--target-h", "0.1", "--output-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let stalled = CliError::Numerics(mfelab::Error::NoConvergence { iterations: 30, residual: 1.0 });
    assert_eq!(stalled.exit_code(), 1);
    assert_eq!(CliError::Io("disk full".into()).exit_code(), 1);
}

#[test]
fn counterexample_prints_a_negative_margin() {
    let dir = out_dir("counterexample");
    let out = mfelab(&["bol", "--counterexample", "--alpha=-0.5", "--json", "--output-dir", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let record: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(record["margin_8pi"].as_f64().unwrap() < 0.0);
    assert_eq!(record["config_hash"].as_str().unwrap().len(), 64);
    assert!(dir.join("counterexample.json").exists());
}

#[test]
fn config_file_overrides_flags() {
    let dir = out_dir("config");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("run.toml");
    std::fs::write(&file, "domain = \"annulus\"\nhole = [0.0, 0.0, 0.25]\ntarget_h = 0.1\n").unwrap();
    let cfg = RunConfig { target_h: 0.05, ..Default::default() }.overridden_by(&file).unwrap();
    assert_eq!(cfg.domain, DomainKind::Annulus);
    assert_eq!(cfg.target_h, 0.1);
    assert_eq!(cfg.thresholds, 32);

    std::fs::write(&file, "no_such_key = 1\n").unwrap();
    assert_eq!(RunConfig::default().overridden_by(&file).unwrap_err().exit_code(), 2);

    let out = mfelab(&[
        "mesh",
        "--target-h",
        "0.05",
        "--config",
        file.to_str().unwrap(),
        "--output-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&file, "target_h = 0.1\n").unwrap();
    let out = mfelab(&[
        "mesh",
        "--json",
        "--target-h",
        "0.05",
        "--config",
        file.to_str().unwrap(),
        "--output-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let record: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(record["max_edge"].as_f64().unwrap() > 0.1);
}

#[test]
fn hash_ignores_the_output_directory() {
    let a = RunConfig { output_dir: "a".into(), ..Default::default() };
    let b = RunConfig { output_dir: "b".into(), ..Default::default() };
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), RunConfig { target_h: 0.02, ..a.clone() }.hash());
}

#[test]
fn bol_and_symmetrize_write_artifacts() {
    let dir = out_dir("bol");
    let d = dir.to_str().unwrap();
    let out = mfelab(&["bol", "--target-h", "0.06", "--json", "--output-dir", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let record: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(record["overall_pass"], true);
    let csv = std::fs::read_to_string(dir.join("bol.csv")).unwrap();
    assert!(csv.starts_with("# config_hash="));
    assert_eq!(csv.lines().count(), 34);
    assert!(std::fs::read_to_string(dir.join("contours.svg")).unwrap().contains("<path"));

    let out = mfelab(&["symmetrize", "--target-h", "0.06", "--json", "--output-dir", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let record: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(record["max_equimeasurability"].as_f64().unwrap() < 1e-3);
    assert_eq!(record["energy_decreases"], true);
}
