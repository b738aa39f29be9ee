//! Single-sample evaluation: binarize, extract, match, measure, stratify.

use serde::Serialize;

use crate::components::{find_connected_components, Connectivity, LesionSet};
use crate::error::Result;
use crate::matching::{match_lesions, MatchSet, DEFAULT_TAU};
use crate::metrics::{
    compute_image_metrics, compute_instance_metrics, compute_matched_metrics, DetectionCounts, DistanceOptions,
    ImageMetrics, LesionPairMetrics,
};
use crate::stratify::{stratify, BinSummary, LesionRecord};
use crate::volume::{binarize, check_compatibility, Volume};

/// Everything that affects metric values. Serialized into every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalConfig {
    pub tau: f64,
    pub connectivity: Connectivity,
    #[serde(flatten)]
    pub distance: DistanceOptions,
    pub binarize_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            tau: DEFAULT_TAU,
            connectivity: Connectivity::Six,
            distance: DistanceOptions::default(),
            binarize_threshold: 0.5,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(0.0..1.0).contains(&self.tau) {
            return Err(format!("tau must be in [0, 1), got {}", self.tau));
        }
        if !self.binarize_threshold.is_finite() {
            return Err("binarize threshold must be finite".into());
        }
        Ok(())
    }
}

/// Intermediate products of one evaluation, kept for callers that want
/// more than the report (traces, label maps).
#[derive(Debug, Clone)]
pub struct PairAnalysis {
    pub gt: LesionSet,
    pub pred: LesionSet,
    pub matches: MatchSet,
    pub pairs: Vec<LesionPairMetrics>,
}

/// Per-sample results as they appear in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleEvaluation {
    pub sample_id: String,
    pub model_tag: String,
    pub gt_path: Option<String>,
    pub pred_path: Option<String>,
    pub gt_lesions: usize,
    pub pred_lesions: usize,
    pub detection: DetectionCounts,
    pub image: ImageMetrics,
    pub bins: Vec<BinSummary>,
    pub lesions: Vec<LesionRecord>,
    pub warnings: Vec<String>,
}

/// Run the full pipeline on a GT/prediction pair.
pub fn analyze_pair(gt: &Volume, pred: &Volume, cfg: &EvalConfig) -> Result<(PairAnalysis, ImageMetrics)> {
    check_compatibility(gt, pred)?;
    let gt_mask = binarize(gt, cfg.binarize_threshold);
    let pred_mask = binarize(pred, cfg.binarize_threshold);

    let (gt_set, pred_set) = rayon::join(
        || find_connected_components(&gt_mask, cfg.connectivity),
        || find_connected_components(&pred_mask, cfg.connectivity),
    );
    let (gt_set, pred_set) = (gt_set?, pred_set?);

    let matches = match_lesions(&gt_set, &pred_set, cfg.tau);
    let pairs = compute_matched_metrics(&gt_set, &pred_set, &matches, cfg.distance)?;
    let image = compute_image_metrics(&gt_mask, &pred_mask, cfg.distance);
    Ok((
        PairAnalysis {
            gt: gt_set,
            pred: pred_set,
            matches,
            pairs,
        },
        image,
    ))
}

pub fn evaluate_pair(sample_id: &str, gt: &Volume, pred: &Volume, cfg: &EvalConfig) -> Result<SampleEvaluation> {
    let (analysis, image) = analyze_pair(gt, pred, cfg)?;
    let detection = compute_instance_metrics(&analysis.gt, &analysis.pred, &analysis.matches);
    let (lesions, bins) = stratify(&analysis.pairs, &analysis.matches, &analysis.gt, &analysis.pred);

    let mut warnings = Vec::new();
    for (what, v) in [("ground truth", gt), ("prediction", pred)] {
        if v.spacing_repaired {
            warnings.push(format!("{what}: zero pixdim replaced by 1.0"));
        }
    }

    Ok(SampleEvaluation {
        sample_id: sample_id.to_string(),
        model_tag: String::new(),
        gt_path: None,
        pred_path: None,
        gt_lesions: analysis.gt.len(),
        pred_lesions: analysis.pred.len(),
        detection,
        image,
        bins,
        lesions,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stratify::SizeBin;

    #[test]
    fn perfect_prediction() {
        let mut data = vec![0u8; 8 * 8 * 8];
        for i in [0usize, 1, 2, 100, 300, 301] {
            data[i] = 1;
        }
        let v = Volume::from_mask([8, 8, 8], [1.0; 3], data).unwrap();
        let s = evaluate_pair("a", &v, &v, &EvalConfig::default()).unwrap();
        assert_eq!(s.detection.tp, s.gt_lesions);
        assert_eq!((s.detection.fp, s.detection.fn_), (0, 0));
        assert_eq!(s.image.voxel_dice, Some(1.0));
        let vs = &s.bins[SizeBin::VerySmall as usize];
        assert_eq!(vs.detection.recall, Some(1.0));
        assert_eq!(vs.dice_mean, Some(1.0));
        assert_eq!(vs.hd95_mean, Some(0.0));
    }

    #[test]
    fn incompatible_pair_rejected() {
        let a = Volume::zeros([2, 2, 2], [1.0; 3]).unwrap();
        let b = Volume::zeros([2, 2, 3], [1.0; 3]).unwrap();
        assert!(evaluate_pair("x", &a, &b, &EvalConfig::default()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(EvalConfig::default().validate().is_ok());
        let bad = EvalConfig { tau: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
