//! Evaluate a manifest of NIfTI pairs from two models in parallel.

use std::fmt::Write as _;

use lesion_eval::synth::{generate_case, Perturbation, PerturbationRule, SynthParams};
use lesion_eval::{emit_reports, run_manifest, write_volume, EvalConfig, Manifest, OutputFormat};

fn main() -> lesion_eval::Result<()> {
    let dir = std::env::temp_dir().join("lesion-eval-batch");
    std::fs::create_dir_all(&dir).expect("temp dir is writable");
    let base = SynthParams { dims: [40, 40, 24], ..SynthParams::default() };
    // "careful" misses more small lesions than "eager", which adds blobs.
    let models = [
        ("careful", SynthParams {
            perturbations: vec![PerturbationRule { perturbation: Perturbation::Erode { radius: 1 }, probability: 0.5 }],
            spurious: 0,
            ..base.clone()
        }),
        ("eager", SynthParams {
            perturbations: vec![PerturbationRule { perturbation: Perturbation::Dilate { radius: 1 }, probability: 0.5 }],
            spurious: 4,
            ..base
        }),
    ];

    let mut manifest = String::from("sample_id,gt_path,pred_path,model_tag\n");
    for (tag, params) in &models {
        for seed in 0..5u64 {
            let case = generate_case(params, seed)?;
            let id = format!("{tag}-{seed:02}");
            write_volume(&case.gt, dir.join(format!("{id}_gt.nii.gz")))?;
            write_volume(&case.pred, dir.join(format!("{id}_pred.nii.gz")))?;
            let _ = writeln!(manifest, "{id},{id}_gt.nii.gz,{id}_pred.nii.gz,{tag}");
        }
    }
    // One row pointing at a file that is not there.
    manifest.push_str("broken,missing_gt.nii.gz,missing_pred.nii.gz,eager\n");

    let manifest = Manifest::parse(&manifest, dir.clone())?;
    let report = run_manifest(&manifest, &EvalConfig::default(), 4)?;
    for m in &report.models {
        let d = m.detection;
        println!(
            "{:<8} samples {} TP {:>3} FP {:>3} FN {:>3} F1 {:.3}",
            m.model_tag, m.n_samples, d.tp, d.fp, d.fn_, d.f1.unwrap_or(f64::NAN)
        );
    }
    for f in &report.failures {
        println!("failed {}: {}", f.sample_id, f.reason);
    }
    let files = emit_reports(&report, &dir.join("out"), OutputFormat::Both)?;
    println!("wrote {} report files under {}", files.len(), dir.join("out").display());
    Ok(())
}
