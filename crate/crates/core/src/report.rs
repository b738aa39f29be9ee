//! Report assembly and serialization.
//!
//! Output files (all orderings by sample id, then lesion id):
//!
//! | file                  | content                                              |
//! |-----------------------|------------------------------------------------------|
//! | `report.json`         | config, per-model rollups, every sample, failures    |
//! | `samples/<id>.json`   | one sample with config header                        |
//! | `dataset_metrics.csv` | one row per (model tag, bin): Dice, HD95, Prec, Recall, F1 |
//! | `lesions.csv`         | one row per lesion: TP/FP/FN, sizes, bin, Dice, HD95 |
//! | `samples.csv`         | one row per sample: voxel-wise and detection metrics |
//! | `sample_bins.csv`     | TP/FP/FN per sample and bin                          |
//!
//! Undefined values are `null` in JSON and empty cells in CSV. CSV numbers
//! carry two decimals (ties to even); JSON keeps full precision.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::DetectionCounts;
use crate::pipeline::{EvalConfig, SampleEvaluation};
use crate::stats::mean;
use crate::stratify::{stratify_records, summarize_all, BinSummary, LesionRecord, SizeBin, Stratum};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Both,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: TOOL_NAME,
            version: TOOL_VERSION,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SampleFailure {
    pub sample_id: String,
    pub reason: String,
}

/// Mean over samples of each sample's per-bin mean.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SampleMeanRow {
    pub bin: Stratum,
    /// Samples with at least one matched pair in the bin.
    pub n_samples: usize,
    pub dice_mean: Option<f64>,
    pub hd95_mean: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ModelRollup {
    pub model_tag: String,
    pub n_samples: usize,
    pub detection: DetectionCounts,
    /// Every lesion of every sample pooled with equal weight.
    pub bins: Vec<BinSummary>,
    pub overall: BinSummary,
    pub sample_means: Vec<SampleMeanRow>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StratifiedReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub config: EvalConfig,
    pub models: Vec<ModelRollup>,
    pub samples: Vec<SampleEvaluation>,
    pub failures: Vec<SampleFailure>,
}

fn rollup(model_tag: &str, samples: &[&SampleEvaluation]) -> ModelRollup {
    let records: Vec<LesionRecord> = samples.iter().flat_map(|s| s.lesions.iter().cloned()).collect();
    let detection = samples
        .iter()
        .fold(DetectionCounts::new(0, 0, 0), |acc, s| acc.merge(&s.detection));

    let sample_means = SizeBin::ALL
        .iter()
        .enumerate()
        .map(|(k, &bin)| {
            let dice: Vec<f64> = samples.iter().filter_map(|s| s.bins[k].dice_mean).collect();
            let hd95: Vec<f64> = samples.iter().filter_map(|s| s.bins[k].hd95_mean).collect();
            SampleMeanRow {
                bin: Stratum::Bin(bin),
                n_samples: dice.len(),
                dice_mean: mean(&dice),
                hd95_mean: mean(&hd95),
            }
        })
        .collect();

    ModelRollup {
        model_tag: model_tag.to_string(),
        n_samples: samples.len(),
        detection,
        bins: stratify_records(&records),
        overall: summarize_all(&records),
        sample_means,
    }
}

/// Assemble a report. Input order does not matter: samples are sorted by
/// id and aggregated in that order.
pub fn build_report(
    config: EvalConfig,
    mut samples: Vec<SampleEvaluation>,
    mut failures: Vec<SampleFailure>,
) -> StratifiedReport {
    samples.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    failures.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));

    let mut by_tag: BTreeMap<&str, Vec<&SampleEvaluation>> = BTreeMap::new();
    for s in &samples {
        by_tag.entry(s.model_tag.as_str()).or_default().push(s);
    }
    let models = by_tag.into_iter().map(|(tag, ss)| rollup(tag, &ss)).collect();

    StratifiedReport {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo::default(),
        config,
        models,
        samples,
        failures,
    }
}

/// Two decimals, ties to even; empty for undefined.
pub fn fmt2(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.2}"),
        None => String::new(),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Filesystem-safe rendering of a sample id.
pub fn file_stem_for(sample_id: &str) -> String {
    sample_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

#[derive(Serialize)]
struct SampleFile<'a> {
    schema_version: u32,
    tool: &'a ToolInfo,
    config: &'a EvalConfig,
    sample: &'a SampleEvaluation,
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_bytes(path, s.as_bytes())
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    write_bytes(path, &bytes)
}

pub const DATASET_HEADER: [&str; 13] = [
    "model_tag",
    "size_bin",
    "dice",
    "hd95",
    "precision",
    "recall",
    "f1",
    "n_gt",
    "tp",
    "fp",
    "fn",
    "dice_median",
    "hd95_median",
];

fn dataset_rows(report: &StratifiedReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for m in &report.models {
        for b in m.bins.iter().chain(std::iter::once(&m.overall)) {
            let d = &b.detection;
            rows.push(vec![
                m.model_tag.clone(),
                b.bin.key().to_string(),
                fmt2(b.dice_mean),
                fmt2(b.hd95_mean),
                fmt2(d.precision),
                fmt2(d.recall),
                fmt2(d.f1),
                b.n_gt.to_string(),
                d.tp.to_string(),
                d.fp.to_string(),
                d.fn_.to_string(),
                fmt2(b.dice_median),
                fmt2(b.hd95_median),
            ]);
        }
    }
    rows
}

pub const LESION_HEADER: [&str; 14] = [
    "sample_id",
    "model_tag",
    "lesion_id",
    "status",
    "gt_id",
    "pred_id",
    "gt_vox",
    "pred_vox",
    "size_bin",
    "dice",
    "iou",
    "hd95",
    "assd",
    "size_ratio",
];

fn lesion_rows(report: &StratifiedReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for s in &report.samples {
        for r in &s.lesions {
            rows.push(vec![
                s.sample_id.clone(),
                s.model_tag.clone(),
                r.lesion_id.to_string(),
                r.status.as_str().to_string(),
                opt(r.gt_id),
                opt(r.pred_id),
                opt(r.gt_vox),
                opt(r.pred_vox),
                r.size_bin.key().to_string(),
                fmt2(r.dice),
                fmt2(r.iou),
                fmt2(r.hd95),
                fmt2(r.assd),
                fmt2(r.size_ratio),
            ]);
        }
    }
    rows
}

pub const SAMPLE_HEADER: [&str; 14] = [
    "sample_id",
    "model_tag",
    "gt_lesions",
    "pred_lesions",
    "tp",
    "fp",
    "fn",
    "precision",
    "recall",
    "f1",
    "voxel_dice",
    "voxel_hd95",
    "assd",
    "gt_total_vox",
];

fn sample_rows(report: &StratifiedReport) -> Vec<Vec<String>> {
    report
        .samples
        .iter()
        .map(|s| {
            let d = &s.detection;
            vec![
                s.sample_id.clone(),
                s.model_tag.clone(),
                s.gt_lesions.to_string(),
                s.pred_lesions.to_string(),
                d.tp.to_string(),
                d.fp.to_string(),
                d.fn_.to_string(),
                fmt2(d.precision),
                fmt2(d.recall),
                fmt2(d.f1),
                fmt2(s.image.voxel_dice),
                fmt2(s.image.voxel_hd95),
                fmt2(s.image.assd),
                s.image.gt_total_vox.to_string(),
            ]
        })
        .collect()
}

pub const SAMPLE_BIN_HEADER: [&str; 6] = ["sample_id", "model_tag", "size_bin", "tp", "fp", "fn"];

fn sample_bin_rows(report: &StratifiedReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for s in &report.samples {
        for b in &s.bins {
            rows.push(vec![
                s.sample_id.clone(),
                s.model_tag.clone(),
                b.bin.key().to_string(),
                b.detection.tp.to_string(),
                b.detection.fp.to_string(),
                b.detection.fn_.to_string(),
            ]);
        }
    }
    rows
}

/// Write the report files into `out_dir` (created if missing) and return
/// their paths.
pub fn emit_reports(report: &StratifiedReport, out_dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        let p = out_dir.join("report.json");
        write_json(&p, report)?;
        written.push(p);

        let dir = out_dir.join("samples");
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for s in &report.samples {
            let p = dir.join(format!("{}.json", file_stem_for(&s.sample_id)));
            write_json(
                &p,
                &SampleFile {
                    schema_version: report.schema_version,
                    tool: &report.tool,
                    config: &report.config,
                    sample: s,
                },
            )?;
            written.push(p);
        }
    }

    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        let files: [(&str, &[&str], Vec<Vec<String>>); 4] = [
            ("dataset_metrics.csv", &DATASET_HEADER, dataset_rows(report)),
            ("lesions.csv", &LESION_HEADER, lesion_rows(report)),
            ("samples.csv", &SAMPLE_HEADER, sample_rows(report)),
            ("sample_bins.csv", &SAMPLE_BIN_HEADER, sample_bin_rows(report)),
        ];
        for (name, header, rows) in files {
            let p = out_dir.join(name);
            write_csv(&p, header, rows)?;
            written.push(p);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_decimal_rounding() {
        assert_eq!(fmt2(Some(0.125)), "0.12");
        assert_eq!(fmt2(Some(0.375)), "0.38");
        assert_eq!(fmt2(Some(2.675)), "2.67"); // binary value is below the tie
        assert_eq!(fmt2(Some(1.0)), "1.00");
        assert_eq!(fmt2(None), "");
    }

    #[test]
    fn safe_file_stems() {
        assert_eq!(file_stem_for("case 01/a"), "case_01_a");
        assert_eq!(file_stem_for("sub-01_ses.1"), "sub-01_ses.1");
    }
}
