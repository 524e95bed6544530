//! End-to-end runs of the `dimbreak` binary: exit codes, emitted files and
//! byte-identical reruns.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dimbreak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dimbreak")).args(args).env("DIMBREAK_THREADS", "2").output().expect("spawn dimbreak")
}

fn data_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.to_string_lossy().ends_with(".manifest.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    let d = dir.to_str().unwrap();
    all.extend(["--out", d, "--quiet"]);
    let out = dimbreak(&all);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn params_emits_one_json_file_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["params", "--tau0", "0.2"]);
    let files = data_files(dir.path());
    assert_eq!(files.keys().collect::<Vec<_>>(), vec!["params.json"]);
    let v: serde_json::Value = serde_json::from_slice(&files["params.json"]).unwrap();
    assert!((v["mu0"].as_f64().unwrap() - 1.86657).abs() < 1e-4);
    let m: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("params.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "params");
    assert_eq!(m["files"].as_array().unwrap().len(), 1);
}

#[test]
fn invalid_tau_exits_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dimbreak(&["params", "--tau0", "0.4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau0"));
}

#[test]
fn unparsable_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, "{ not json").unwrap();
    let out = dimbreak(&["params", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = dimbreak(&["params", "--tau0", "abc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"tau0": 0.4, "eps": 0.05}"#).unwrap();
    let out_dir = dir.path().join("o");
    let out = dimbreak(&["params", "--config", cfg.to_str().unwrap(), "--tau0", "0.2", "--out", out_dir.to_str().unwrap(), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("params.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["tau0"].as_f64(), Some(0.2));
}

#[test]
fn coarse_dimbreak_exits_three_with_spectral_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = dimbreak(&["dimbreak", "--tau0", "0.2", "--n", "64", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spectral structure"));
}

#[test]
fn out_file_sets_name_and_format() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("curve.csv");
    let out = dimbreak(&["dispersion", "--tau0", "0.2", "--n", "64", "--out", file.to_str().unwrap(), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&file).unwrap();
    assert!(text.starts_with("mu,lambda,q,g\n"));
    assert_eq!(text.lines().count(), 65);
    assert!(!text.contains('\r'));
}

#[test]
fn synth_writes_surface_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["synth", "--tau0", "0.2", "--n", "256", "--nz", "8", "--s", "0.1"]);
    let files = data_files(dir.path());
    let csv = String::from_utf8(files["synth.csv"].clone()).unwrap();
    assert!(csv.starts_with("x,z,eta\n"));
    assert_eq!(csv.lines().count(), 1 + 256 * 8);
    let side: serde_json::Value = serde_json::from_slice(&files["synth.json"]).unwrap();
    assert_eq!(side["meta"]["leading_order_amplitude"].as_f64(), Some(0.1));
}

/// Every subcommand, run twice, produces byte-identical data files.
#[test]
fn reruns_are_byte_identical() {
    let cases: &[&[&str]] = &[
        &["params", "--tau0", "0.2"],
        &["dispersion", "--tau0", "0.2", "--n", "200"],
        &["coeffs", "--tau0", "0.2"],
        &["soliton", "--tau0", "0.2", "--n", "256", "--ny", "9"],
        &["spectrum", "--tau0", "0.2", "--n", "1024", "--count", "4"],
        &["dimbreak", "--tau0", "0.2", "--n", "512"],
        &["bvp-check", "--tau0", "0.2", "--n", "512", "--ny", "17"],
        &["linop-check", "--tau0", "0.2", "--eps", "0.1", "--n", "512", "--fix-r"],
        &["synth", "--tau0", "0.2", "--n", "256", "--nz", "8"],
    ];
    for args in cases {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_in(a.path(), args);
        run_in(b.path(), args);
        let (fa, fb) = (data_files(a.path()), data_files(b.path()));
        assert!(!fa.is_empty(), "{args:?}");
        assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>(), "{args:?}");
        for (name, bytes) in &fa {
            assert!(bytes == &fb[name], "{args:?}: {name} differs between runs");
        }
    }
}
