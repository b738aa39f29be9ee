//! The `lesion-eval` command line: `evaluate`, `tune-tau` and `inspect`.
//!
//! Exit codes: 0 on success, 2 when some samples failed (the rest are still
//! reported), 1 on usage or configuration errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::batch::{run_manifest, Manifest};
use crate::components::{find_connected_components, Connectivity};
use crate::error::{Error, Result};
use crate::matching::{generate_candidates, greedy_match_traced, DEFAULT_TAU};
use crate::metrics::{DistanceOptions, DistanceUnits, Hd95Variant};
use crate::pipeline::{analyze_pair, EvalConfig, SampleEvaluation};
use crate::report::{build_report, emit_reports, OutputFormat, SampleFailure};
use crate::stratify::{categorize, SizeBin};
use crate::synth::{default_sweep_grid, generate_case, import_cases, tau_sweep, SynthParams, TauSweepResult};
use crate::volume::{binarize, read_volume, write_volume};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lesion-eval", version, about = "Lesion-wise evaluation of 3D segmentation masks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate predictions against ground truth and write reports.
    Evaluate(EvaluateArgs),
    /// Sweep the IoU threshold on synthetic cases with known correspondences.
    TuneTau(TuneTauArgs),
    /// Summarize one mask: size, foreground, lesion counts per size bin.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// CSV with columns sample_id, gt_path, pred_path[, model_tag].
    #[arg(long, conflicts_with_all = ["gt", "pred"], required_unless_present_all = ["gt", "pred"])]
    pub manifest: Option<PathBuf>,
    /// Ground-truth mask (single-pair mode).
    #[arg(long, requires = "pred")]
    pub gt: Option<PathBuf>,
    /// Predicted mask (single-pair mode).
    #[arg(long, requires = "gt")]
    pub pred: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long, default_value_t = Connectivity::Six)]
    pub connectivity: Connectivity,
    #[arg(long, default_value_t = DistanceUnits::Mm)]
    pub distance_units: DistanceUnits,
    #[arg(long, default_value_t = Hd95Variant::Pooled)]
    pub hd95_variant: Hd95Variant,
    /// Voxels strictly above this value are foreground.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value = "lesion-eval-out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// json, csv or both.
    #[arg(long, default_value = "both")]
    pub format: OutputFormat,
    /// Write the greedy matching decisions to `trace.txt` (single-pair mode).
    #[arg(long, requires = "gt")]
    pub trace: bool,
    /// Write the GT and prediction label maps as NIfTI (single-pair mode).
    #[arg(long, requires = "gt")]
    pub dump_labels: bool,
}

#[derive(Debug, Args)]
pub struct TuneTauArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of generated cases; case i uses seed + i.
    #[arg(long, default_value_t = 50)]
    pub cases: usize,
    /// Generator parameters as JSON; omitted fields take defaults.
    #[arg(long, conflicts_with = "cases_dir")]
    pub params: Option<PathBuf>,
    /// Use previously exported cases instead of generating.
    #[arg(long)]
    pub cases_dir: Option<PathBuf>,
    /// Comma-separated thresholds, ascending. Defaults to 0.05..0.95 by 0.05.
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    #[arg(long, default_value = "lesion-eval-tune")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub path: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

/// Parse arguments and run; returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::TuneTau(a) => cmd_tune_tau(&a).map(|_| EXIT_OK),
        Command::Inspect(a) => {
            print!("{}", cmd_inspect(&a.path, a.threshold)?);
            Ok(EXIT_OK)
        }
    }
}

fn eval_config(a: &EvaluateArgs) -> Result<EvalConfig> {
    let cfg = EvalConfig {
        tau: a.tau,
        connectivity: a.connectivity,
        distance: DistanceOptions {
            units: a.distance_units,
            hd95_variant: a.hd95_variant,
        },
        binarize_threshold: a.threshold,
    };
    cfg.validate().map_err(Error::Config)?;
    if a.jobs == 0 {
        return Err(Error::Config("--jobs must be positive".into()));
    }
    Ok(cfg)
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<i32> {
    let cfg = eval_config(a)?;
    let report = match (&a.manifest, &a.gt, &a.pred) {
        (Some(m), _, _) => run_manifest(&Manifest::from_path(m)?, &cfg, a.jobs)?,
        (None, Some(gt), Some(pred)) => {
            let (samples, failures) = match evaluate_single(gt, pred, &cfg, a) {
                Ok(s) => (vec![s], vec![]),
                Err(e) => (
                    vec![],
                    vec![SampleFailure {
                        sample_id: "pair".into(),
                        reason: e.to_string(),
                    }],
                ),
            };
            build_report(cfg, samples, failures)
        }
        _ => return Err(Error::Config("give --manifest or both --gt and --pred".into())),
    };
    emit_reports(&report, &a.out, a.format)?;
    for f in &report.failures {
        eprintln!("failed {}: {}", f.sample_id, f.reason);
    }
    println!(
        "evaluated {} samples ({} failed); reports in {}",
        report.samples.len() + report.failures.len(),
        report.failures.len(),
        a.out.display()
    );
    Ok(if report.failures.is_empty() { EXIT_OK } else { EXIT_PARTIAL })
}

fn evaluate_single(gt: &Path, pred: &Path, cfg: &EvalConfig, a: &EvaluateArgs) -> Result<SampleEvaluation> {
    let gt_vol = read_volume(gt)?;
    let pred_vol = read_volume(pred)?;
    if a.trace || a.dump_labels {
        let (analysis, _) = analyze_pair(&gt_vol, &pred_vol, cfg)?;
        fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
        if a.trace {
            let mut text = String::new();
            for entry in greedy_match_traced(&generate_candidates(&analysis.gt, &analysis.pred, cfg.tau)) {
                let _ = writeln!(text, "{entry}");
            }
            let path = a.out.join("trace.txt");
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        if a.dump_labels {
            write_volume(&analysis.gt.label_volume()?, a.out.join("gt_labels.nii.gz"))?;
            write_volume(&analysis.pred.label_volume()?, a.out.join("pred_labels.nii.gz"))?;
        }
    }
    let mut s = crate::pipeline::evaluate_pair("pair", &gt_vol, &pred_vol, cfg)?;
    s.gt_path = Some(gt.display().to_string());
    s.pred_path = Some(pred.display().to_string());
    Ok(s)
}

#[derive(Serialize)]
struct TuneOutput<'a> {
    #[serde(flatten)]
    sweep: &'a TauSweepResult,
    n_cases: usize,
    seed: Option<u64>,
    /// The evaluate default, which tuning never changes.
    evaluate_default_tau: f64,
}

pub fn cmd_tune_tau(a: &TuneTauArgs) -> Result<TauSweepResult> {
    let (cases, seed) = match &a.cases_dir {
        Some(dir) => (import_cases(dir)?, None),
        None => {
            let params = match &a.params {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    serde_json::from_str::<SynthParams>(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
                }
                None => SynthParams::default(),
            };
            let cases = (0..a.cases as u64)
                .map(|i| generate_case(&params, a.seed.wrapping_add(i)))
                .collect::<Result<Vec<_>>>()?;
            (cases, Some(a.seed))
        }
    };
    let taus = a.taus.clone().unwrap_or_else(default_sweep_grid);
    let result = tau_sweep(&cases, &taus)?;

    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let csv_path = a.out.join("tau_sweep.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["tau", "f1"])?;
    for (t, f) in result.taus.iter().zip(&result.f1_at_tau) {
        w.write_record([format!("{t:.2}"), format!("{f:.4}")])?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;

    let json_path = a.out.join("tau_sweep.json");
    let out = TuneOutput {
        sweep: &result,
        n_cases: cases.len(),
        seed,
        evaluate_default_tau: DEFAULT_TAU,
    };
    let mut text = serde_json::to_string_pretty(&out)?;
    text.push('\n');
    fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
    println!("best tau {:.2} over {} cases (evaluate default stays {DEFAULT_TAU})", result.best_tau, cases.len());
    Ok(result)
}

/// Human-readable summary of one mask.
pub fn cmd_inspect(path: &Path, threshold: f64) -> Result<String> {
    let v = read_volume(path)?;
    let mask = binarize(&v, threshold);
    let [x, y, z] = v.dims();
    let [sx, sy, sz] = v.spacing();
    let mut out = String::new();
    let _ = writeln!(out, "file: {}", path.display());
    let _ = writeln!(out, "dims: {x} x {y} x {z}");
    let _ = writeln!(out, "spacing: {sx} x {sy} x {sz} mm");
    let _ = writeln!(out, "foreground voxels: {}", mask.foreground_count());
    for conn in Connectivity::ALL {
        let set = find_connected_components(&mask, conn)?;
        let mut bins = [0usize; 4];
        for l in &set.lesions {
            bins[categorize(l.volume_vox()) as usize] += 1;
        }
        let per_bin: Vec<String> = SizeBin::ALL.iter().zip(bins).map(|(b, n)| format!("{} {n}", b.key())).collect();
        let noun = if set.len() == 1 { "lesion" } else { "lesions" };
        let _ = writeln!(out, "connectivity {conn}: {} {noun} ({})", set.len(), per_bin.join(", "));
    }
    if v.spacing_repaired {
        let _ = writeln!(out, "warning: zero pixdim replaced by 1.0");
    }
    Ok(out)
}
