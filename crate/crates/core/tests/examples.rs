//! Runs every example binary built alongside the tests.

use std::path::PathBuf;
use std::process::Command;

fn example(name: &str) -> String {
    let bin = PathBuf::from(env!("CARGO_BIN_EXE_lesion-eval"));
    let path = bin.parent().unwrap().join("examples").join(name);
    if !path.exists() {
        // built on demand when the test runs in isolation
        let ok = Command::new(env!("CARGO"))
            .args(["build", "--quiet", "--example", name, "--manifest-path"])
            .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/Cargo.toml"))
            .status()
            .map(|s| s.success())
            .unwrap_or(false);
        assert!(ok, "could not build example {name}");
    }
    let out = Command::new(&path).output().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn nifti_roundtrip() {
    let out = example("nifti_roundtrip");
    assert_eq!(out.matches("identical: true").count(), 2, "{out}");
}

#[test]
fn extract_lesions() {
    let out = example("extract_lesions");
    assert!(out.contains("6-connectivity: 4 lesions"), "{out}");
    assert!(out.contains("26-connectivity: 2 lesions"), "{out}");
}

#[test]
fn greedy_matching() {
    let out = example("greedy_matching");
    assert!(out.contains("matches: [(1, 1), (2, 2)]"), "{out}");
}

#[test]
fn surface_distances() {
    assert!(example("surface_distances").contains("HD95 pooled"));
}

#[test]
fn divergence_demo() {
    let out = example("divergence_demo");
    assert!(out.contains("voxel-wise Dice     0.9756"), "{out}");
    assert!(out.contains("lesion-wise recall  0.1667"), "{out}");
}

#[test]
fn stratified_report() {
    assert!(example("stratified_report").contains("model_tag,size_bin,dice"));
}

#[test]
fn tune_tau() {
    assert!(example("tune_tau").contains("best tau"));
}

#[test]
fn batch_evaluate() {
    let out = example("batch_evaluate");
    assert!(out.contains("failed broken"), "{out}");
}
