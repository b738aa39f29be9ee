//! Manifest-driven evaluation of many samples.
//!
//! A manifest is a CSV file with a header row and the columns `sample_id`,
//! `gt_path`, `pred_path` and optionally `model_tag`. Relative paths are
//! resolved against the manifest's directory.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::pipeline::{evaluate_pair, EvalConfig, SampleEvaluation};
use crate::report::{build_report, SampleFailure, StratifiedReport};
use crate::volume::read_volume;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ManifestRow {
    pub sample_id: String,
    pub gt_path: String,
    pub pred_path: String,
    #[serde(default)]
    pub model_tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
    /// Directory relative paths resolve against.
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base_dir)
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        for (line, rec) in reader.deserialize::<ManifestRow>().enumerate() {
            let row = rec.map_err(|e| Error::ManifestParse(format!("row {}: {e}", line + 1)))?;
            if row.sample_id.is_empty() {
                return Err(Error::ManifestParse(format!("row {}: empty sample_id", line + 1)));
            }
            if !seen.insert(row.sample_id.clone()) {
                return Err(Error::ManifestParse(format!("duplicate sample_id {:?}", row.sample_id)));
            }
            rows.push(row);
        }
        Ok(Manifest { rows, base_dir })
    }

    pub fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

fn evaluate_row(manifest: &Manifest, row: &ManifestRow, cfg: &EvalConfig) -> std::result::Result<SampleEvaluation, SampleFailure> {
    let fail = |reason: String| SampleFailure {
        sample_id: row.sample_id.clone(),
        reason,
    };
    let gt_path = manifest.resolve(&row.gt_path);
    let pred_path = manifest.resolve(&row.pred_path);
    for (what, p, raw) in [("gt_path", &gt_path, &row.gt_path), ("pred_path", &pred_path, &row.pred_path)] {
        if !p.exists() {
            return Err(fail(format!("{what} {raw:?} does not exist")));
        }
    }
    let gt = read_volume(&gt_path).map_err(|e| fail(format!("gt_path {:?}: {e}", row.gt_path)))?;
    let pred = read_volume(&pred_path).map_err(|e| fail(format!("pred_path {:?}: {e}", row.pred_path)))?;
    let mut s = evaluate_pair(&row.sample_id, &gt, &pred, cfg).map_err(|e| fail(e.to_string()))?;
    s.model_tag = row.model_tag.clone().unwrap_or_default();
    s.gt_path = Some(row.gt_path.clone());
    s.pred_path = Some(row.pred_path.clone());
    Ok(s)
}

/// Evaluate every manifest row on up to `jobs` threads. Failing samples are
/// collected rather than aborting the run. The result does not depend on
/// `jobs`.
pub fn run_manifest(manifest: &Manifest, cfg: &EvalConfig, jobs: usize) -> Result<StratifiedReport> {
    use rayon::prelude::*;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        manifest
            .rows
            .par_iter()
            .map(|row| evaluate_row(manifest, row, cfg))
            .collect()
    });

    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(f) => failures.push(f),
        }
    }
    Ok(build_report(*cfg, samples, failures))
}
