//! Lesion-pair, detection and voxel-wise metrics.
//!
//! Undefined quantities (e.g. precision with no predictions) are `None` and
//! serialize as `null`.

mod surface;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::components::{Lesion, LesionSet, Voxel};
use crate::error::Result;
use crate::matching::{overlap_counts, MatchSet};
use crate::volume::Volume;

pub use surface::{surface_voxels, Hd95Variant, SurfaceDistances};

/// Unit of reported surface distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceUnits {
    /// Physical units from the volume spacing.
    #[default]
    Mm,
    /// Voxel index units (spacing ignored).
    Voxels,
}

impl fmt::Display for DistanceUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceUnits::Mm => "mm",
            DistanceUnits::Voxels => "voxels",
        })
    }
}

impl FromStr for DistanceUnits {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mm" => Ok(DistanceUnits::Mm),
            "voxels" => Ok(DistanceUnits::Voxels),
            other => Err(format!("unknown distance unit {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DistanceOptions {
    pub units: DistanceUnits,
    pub hd95_variant: Hd95Variant,
}

impl DistanceOptions {
    pub fn effective_spacing(&self, spacing: [f64; 3]) -> [f64; 3] {
        match self.units {
            DistanceUnits::Mm => spacing,
            DistanceUnits::Voxels => [1.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LesionPairMetrics {
    pub gt_id: u32,
    pub pred_id: u32,
    pub dice: f64,
    pub iou: f64,
    /// In the configured distance units.
    pub hd95: f64,
    pub assd: f64,
    pub gt_vox: usize,
    pub pred_vox: usize,
    /// (pred - gt) / gt
    pub volume_error_rel: f64,
    /// pred / gt
    pub size_ratio: f64,
}

/// TP/FP/FN and the derived rates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DetectionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl DetectionCounts {
    pub fn new(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
        let recall = (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        DetectionCounts {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }

    /// Counts summed, rates recomputed.
    pub fn merge(&self, other: &DetectionCounts) -> DetectionCounts {
        DetectionCounts::new(self.tp + other.tp, self.fp + other.fp, self.fn_ + other.fn_)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImageMetrics {
    pub voxel_dice: Option<f64>,
    pub voxel_hd95: Option<f64>,
    pub assd: Option<f64>,
    pub gt_total_vox: usize,
    pub pred_total_vox: usize,
}

/// 2|a∩b| / (|a|+|b|); `None` when both sets are empty.
pub fn dice(a: &[Voxel], b: &[Voxel]) -> Option<f64> {
    let sa: HashSet<Voxel> = a.iter().copied().collect();
    let sb: HashSet<Voxel> = b.iter().copied().collect();
    let total = sa.len() + sb.len();
    if total == 0 {
        return None;
    }
    let inter = sa.intersection(&sb).count();
    Some(2.0 * inter as f64 / total as f64)
}

pub fn hd95(a: &[Voxel], b: &[Voxel], spacing: [f64; 3], variant: Hd95Variant) -> Result<f64> {
    Ok(SurfaceDistances::between(a, b, spacing)?.hd95(variant))
}

pub fn assd(a: &[Voxel], b: &[Voxel], spacing: [f64; 3]) -> Result<f64> {
    Ok(SurfaceDistances::between(a, b, spacing)?.assd())
}

pub fn compute_lesion_metrics(
    g: &Lesion,
    p: &Lesion,
    spacing: [f64; 3],
    opts: DistanceOptions,
) -> Result<LesionPairMetrics> {
    let (inter, union) = overlap_counts(g, p);
    let (gv, pv) = (g.volume_vox(), p.volume_vox());
    let dist = SurfaceDistances::between(&g.voxels, &p.voxels, opts.effective_spacing(spacing))?;
    Ok(LesionPairMetrics {
        gt_id: g.id,
        pred_id: p.id,
        dice: 2.0 * inter as f64 / (gv + pv) as f64,
        iou: inter as f64 / union as f64,
        hd95: dist.hd95(opts.hd95_variant),
        assd: dist.assd(),
        gt_vox: gv,
        pred_vox: pv,
        volume_error_rel: (pv as f64 - gv as f64) / gv as f64,
        size_ratio: pv as f64 / gv as f64,
    })
}

/// Metrics for every match, in acceptance order.
pub fn compute_matched_metrics(
    gt: &LesionSet,
    pred: &LesionSet,
    m: &MatchSet,
    opts: DistanceOptions,
) -> Result<Vec<LesionPairMetrics>> {
    m.matches
        .iter()
        .map(|mm| {
            let g = gt.get(mm.gt_id).expect("match refers to a GT lesion");
            let p = pred.get(mm.pred_id).expect("match refers to a predicted lesion");
            compute_lesion_metrics(g, p, gt.spacing, opts)
        })
        .collect()
}

pub fn compute_instance_metrics(_gt: &LesionSet, _pred: &LesionSet, m: &MatchSet) -> DetectionCounts {
    DetectionCounts::new(m.matches.len(), m.unmatched_pred.len(), m.unmatched_gt.len())
}

/// Whole-foreground Dice, HD95 and ASSD. Both volumes must share a grid.
pub fn compute_image_metrics(gt: &Volume, pred: &Volume, opts: DistanceOptions) -> ImageMetrics {
    let a = gt.foreground();
    let b = pred.foreground();
    let na = a.iter().filter(|&&x| x).count();
    let nb = b.iter().filter(|&&x| x).count();
    let inter = a.iter().zip(&b).filter(|(&x, &y)| x && y).count();
    let voxel_dice = (na + nb > 0).then(|| 2.0 * inter as f64 / (na + nb) as f64);
    let dist = SurfaceDistances::between_masks(&a, &b, gt.dims(), opts.effective_spacing(gt.spacing()));
    ImageMetrics {
        voxel_dice,
        voxel_hd95: dist.as_ref().map(|d| d.hd95(opts.hd95_variant)),
        assd: dist.as_ref().map(SurfaceDistances::assd),
        gt_total_vox: na,
        pred_total_vox: nb,
    }
}
