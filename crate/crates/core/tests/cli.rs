use std::path::Path;
use std::process::{Command, Output};

use lesion_eval::synth::{generate_case, SynthParams};
use lesion_eval::write_volume;

fn lesion_eval(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lesion-eval"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

/// Writes one synthetic pair per seed; returns manifest rows without header.
fn write_cases(dir: &Path, seeds: &[u64]) -> Vec<String> {
    let params = SynthParams::default();
    seeds
        .iter()
        .map(|&seed| {
            let c = generate_case(&params, seed).unwrap();
            let id = format!("case{seed}");
            write_volume(&c.gt, dir.join(format!("{id}_gt.nii.gz"))).unwrap();
            write_volume(&c.pred, dir.join(format!("{id}_pred.nii.gz"))).unwrap();
            format!("{id},{id}_gt.nii.gz,{id}_pred.nii.gz")
        })
        .collect()
}

fn write_manifest(dir: &Path, name: &str, rows: &[String]) -> String {
    let path = dir.join(name);
    std::fs::write(&path, format!("sample_id,gt_path,pred_path\n{}\n", rows.join("\n"))).unwrap();
    path.display().to_string()
}

#[test]
fn missing_file_fails_only_that_sample() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = write_cases(dir.path(), &[1, 2]);
    rows.push("ghost,nope_gt.nii,nope_pred.nii".into());
    let manifest = write_manifest(dir.path(), "m.csv", &rows);
    let out = dir.path().join("out");
    let r = lesion_eval(&["evaluate", "--manifest", &manifest], &out);
    assert_eq!(r.status.code(), Some(2), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stderr).contains("ghost"));

    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["samples"].as_array().unwrap().len(), 2);
    assert_eq!(report["failures"][0]["sample_id"], "ghost");
    assert_eq!(report["config"]["tau"], 0.35);
    assert_eq!(report["tool"]["name"], "lesion-eval");
}

#[test]
fn lesion_table_is_compositional() {
    let dir = tempfile::tempdir().unwrap();
    let rows = write_cases(dir.path(), &[3, 4]);
    let both = write_manifest(dir.path(), "both.csv", &rows);
    let first = write_manifest(dir.path(), "first.csv", &rows[..1]);
    let second = write_manifest(dir.path(), "second.csv", &rows[1..]);

    let run = |m: &str, name: &str| {
        let out = dir.path().join(name);
        let r = lesion_eval(&["evaluate", "--manifest", m, "--format", "csv"], &out);
        assert_eq!(r.status.code(), Some(0));
        std::fs::read_to_string(out.join("lesions.csv")).unwrap()
    };
    let whole = run(&both, "o_both");
    let a = run(&first, "o_first");
    let b = run(&second, "o_second");
    let header = whole.lines().next().unwrap();
    let mut union: Vec<&str> = vec![header];
    union.extend(a.lines().skip(1));
    union.extend(b.lines().skip(1));
    assert_eq!(whole.lines().collect::<Vec<_>>(), union);
    assert!(!dir.path().join("o_both/report.json").exists());
}

#[test]
fn perfect_prediction_single_pair() {
    let dir = tempfile::tempdir().unwrap();
    let c = generate_case(&SynthParams::default().unperturbed(), 9).unwrap();
    let gt = dir.path().join("gt.nii");
    write_volume(&c.gt, &gt).unwrap();
    let out = dir.path().join("out");
    let g = gt.display().to_string();
    let r = lesion_eval(&["evaluate", "--gt", &g, "--pred", &g, "--trace", "--dump-labels"], &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let det = &report["samples"][0]["detection"];
    let n = report["samples"][0]["gt_lesions"].as_u64().unwrap();
    assert_eq!(det["tp"].as_u64(), Some(n));
    assert_eq!((det["fp"].as_u64(), det["fn"].as_u64()), (Some(0), Some(0)));
    let trace = std::fs::read_to_string(out.join("trace.txt")).unwrap();
    assert_eq!(trace.lines().filter(|l| l.ends_with("accepted")).count() as u64, n);
    let labels = lesion_eval::read_volume(out.join("gt_labels.nii.gz")).unwrap();
    let max = (0..labels.len()).map(|i| labels.data().get(i) as u64).max().unwrap();
    assert_eq!(max, n);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(lesion_eval(&["evaluate", "--gt", "a", "--pred", "b", "--tau", "1.5"], &out).status.code(), Some(1));
    assert_eq!(lesion_eval(&["evaluate", "--manifest", "/no/such.csv"], &out).status.code(), Some(1));
    let bad = dir.path().join("dup.csv");
    std::fs::write(&bad, "sample_id,gt_path,pred_path\na,x,y\na,x,y\n").unwrap();
    assert_eq!(lesion_eval(&["evaluate", "--manifest", &bad.display().to_string()], &out).status.code(), Some(1));
}

#[test]
fn tune_tau_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let r = lesion_eval(&["tune-tau", "--seed", "5", "--cases", "4"], &out);
        assert_eq!(r.status.code(), Some(0));
        (
            std::fs::read_to_string(out.join("tau_sweep.csv")).unwrap(),
            std::fs::read_to_string(out.join("tau_sweep.json")).unwrap(),
        )
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    assert_eq!(a.0.lines().count(), 20);
    let json: serde_json::Value = serde_json::from_str(&a.1).unwrap();
    assert_eq!(json["evaluate_default_tau"], 0.35);
}

#[test]
fn tune_tau_flat_on_identity_cases() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.json");
    std::fs::write(&params, r#"{"perturbations": [], "spurious": 0}"#).unwrap();
    let out = dir.path().join("out");
    let r = lesion_eval(&["tune-tau", "--cases", "3", "--params", &params.display().to_string()], &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out.join("tau_sweep.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",1.0000")), "{csv}");
}

#[test]
fn inspect_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let c = generate_case(&SynthParams::default().unperturbed(), 2).unwrap();
    let p = dir.path().join("m.nii.gz");
    write_volume(&c.gt, &p).unwrap();
    let r = Command::new(env!("CARGO_BIN_EXE_lesion-eval")).arg("inspect").arg(&p).output().unwrap();
    assert_eq!(r.status.code(), Some(0));
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.contains("dims: 96 x 96 x 1"), "{text}");
    assert!(text.contains("connectivity 6: 11 lesions (very_small 4, small 4, medium 2, large 1)"), "{text}");
}
