//! Size-stratified detection and segmentation summaries.
//!
//! Bins are half-open voxel-count intervals: very small [1, 10), small
//! [10, 100), medium [100, 400), large [400, ∞). True positives and false
//! negatives are binned by ground-truth size; false positives, having no
//! ground-truth counterpart, are binned by predicted size.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::components::LesionSet;
use crate::matching::MatchSet;
use crate::metrics::{DetectionCounts, LesionPairMetrics};
use crate::stats::{mean, median};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeBin {
    VerySmall,
    Small,
    Medium,
    Large,
}

impl SizeBin {
    pub const ALL: [SizeBin; 4] = [SizeBin::VerySmall, SizeBin::Small, SizeBin::Medium, SizeBin::Large];

    /// Inclusive lower edge in voxels.
    pub fn lower_vox(self) -> usize {
        match self {
            SizeBin::VerySmall => 1,
            SizeBin::Small => 10,
            SizeBin::Medium => 100,
            SizeBin::Large => 400,
        }
    }

    /// Exclusive upper edge; `None` for the open-ended bin.
    pub fn upper_vox(self) -> Option<usize> {
        match self {
            SizeBin::VerySmall => Some(10),
            SizeBin::Small => Some(100),
            SizeBin::Medium => Some(400),
            SizeBin::Large => None,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            SizeBin::VerySmall => "very_small",
            SizeBin::Small => "small",
            SizeBin::Medium => "medium",
            SizeBin::Large => "large",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SizeBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SizeBin::VerySmall => "Very Small",
            SizeBin::Small => "Small",
            SizeBin::Medium => "Medium",
            SizeBin::Large => "Large",
        })
    }
}

/// Bin for a lesion of `volume_vox` voxels.
pub fn categorize(volume_vox: usize) -> SizeBin {
    match volume_vox {
        0..=9 => SizeBin::VerySmall,
        10..=99 => SizeBin::Small,
        100..=399 => SizeBin::Medium,
        _ => SizeBin::Large,
    }
}

/// A size bin or the union of all bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stratum {
    Bin(SizeBin),
    All,
}

impl Stratum {
    pub fn key(self) -> &'static str {
        match self {
            Stratum::Bin(b) => b.key(),
            Stratum::All => "all",
        }
    }
}

impl Serialize for Stratum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LesionStatus {
    TP,
    FP,
    FN,
}

impl LesionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LesionStatus::TP => "TP",
            LesionStatus::FP => "FP",
            LesionStatus::FN => "FN",
        }
    }
}

/// One row of the long-format lesion table. `lesion_id` is the GT id for
/// TP/FN rows and the prediction id for FP rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LesionRecord {
    pub lesion_id: u32,
    pub status: LesionStatus,
    pub gt_id: Option<u32>,
    pub pred_id: Option<u32>,
    pub gt_vox: Option<usize>,
    pub pred_vox: Option<usize>,
    pub size_bin: SizeBin,
    pub dice: Option<f64>,
    pub iou: Option<f64>,
    pub hd95: Option<f64>,
    pub assd: Option<f64>,
    pub size_ratio: Option<f64>,
    pub volume_error_rel: Option<f64>,
}

/// Counts and matched-pair aggregates for one stratum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinSummary {
    pub bin: Stratum,
    pub n_gt: usize,
    #[serde(flatten)]
    pub detection: DetectionCounts,
    pub dice_mean: Option<f64>,
    pub dice_median: Option<f64>,
    pub hd95_mean: Option<f64>,
    pub hd95_median: Option<f64>,
}

/// Lesion table for one sample: every GT lesion (TP or FN) in id order,
/// then every unmatched prediction (FP) in id order.
pub fn build_records(
    gt: &LesionSet,
    pred: &LesionSet,
    m: &MatchSet,
    pairs: &[LesionPairMetrics],
) -> Vec<LesionRecord> {
    let mut out = Vec::with_capacity(gt.len() + m.unmatched_pred.len());
    for g in &gt.lesions {
        let gv = g.volume_vox();
        let record = match pairs.iter().find(|p| p.gt_id == g.id) {
            Some(p) => LesionRecord {
                lesion_id: g.id,
                status: LesionStatus::TP,
                gt_id: Some(g.id),
                pred_id: Some(p.pred_id),
                gt_vox: Some(gv),
                pred_vox: Some(p.pred_vox),
                size_bin: categorize(gv),
                dice: Some(p.dice),
                iou: Some(p.iou),
                hd95: Some(p.hd95),
                assd: Some(p.assd),
                size_ratio: Some(p.size_ratio),
                volume_error_rel: Some(p.volume_error_rel),
            },
            None => LesionRecord {
                lesion_id: g.id,
                status: LesionStatus::FN,
                gt_id: Some(g.id),
                pred_id: None,
                gt_vox: Some(gv),
                pred_vox: None,
                size_bin: categorize(gv),
                dice: None,
                iou: None,
                hd95: None,
                assd: None,
                size_ratio: None,
                volume_error_rel: None,
            },
        };
        out.push(record);
    }
    for &pid in &m.unmatched_pred {
        let pv = pred.get(pid).map_or(0, |p| p.volume_vox());
        out.push(LesionRecord {
            lesion_id: pid,
            status: LesionStatus::FP,
            gt_id: None,
            pred_id: Some(pid),
            gt_vox: None,
            pred_vox: Some(pv),
            size_bin: categorize(pv),
            dice: None,
            iou: None,
            hd95: None,
            assd: None,
            size_ratio: None,
            volume_error_rel: None,
        });
    }
    out
}

fn summarize<'a>(stratum: Stratum, records: impl Iterator<Item = &'a LesionRecord>) -> BinSummary {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let mut dice = Vec::new();
    let mut hd95 = Vec::new();
    for r in records {
        match r.status {
            LesionStatus::TP => {
                tp += 1;
                dice.extend(r.dice);
                hd95.extend(r.hd95);
            }
            LesionStatus::FP => fp += 1,
            LesionStatus::FN => fn_ += 1,
        }
    }
    BinSummary {
        bin: stratum,
        n_gt: tp + fn_,
        detection: DetectionCounts::new(tp, fp, fn_),
        dice_mean: mean(&dice),
        dice_median: median(&dice),
        hd95_mean: mean(&hd95),
        hd95_median: median(&hd95),
    }
}

/// Per-bin summaries, in bin order.
pub fn stratify_records(records: &[LesionRecord]) -> Vec<BinSummary> {
    let mut buckets: [Vec<&LesionRecord>; 4] = Default::default();
    for r in records {
        buckets[r.size_bin.index()].push(r);
    }
    SizeBin::ALL
        .iter()
        .zip(buckets)
        .map(|(&bin, recs)| summarize(Stratum::Bin(bin), recs.into_iter()))
        .collect()
}

/// Summary over all bins together.
pub fn summarize_all(records: &[LesionRecord]) -> BinSummary {
    summarize(Stratum::All, records.iter())
}

/// Records plus per-bin summaries for one sample.
pub fn stratify(
    pairs: &[LesionPairMetrics],
    m: &MatchSet,
    gt: &LesionSet,
    pred: &LesionSet,
) -> (Vec<LesionRecord>, Vec<BinSummary>) {
    let records = build_records(gt, pred, m, pairs);
    let bins = stratify_records(&records);
    (records, bins)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_edges() {
        let cases = [
            (1, SizeBin::VerySmall),
            (9, SizeBin::VerySmall),
            (10, SizeBin::Small),
            (99, SizeBin::Small),
            (100, SizeBin::Medium),
            (399, SizeBin::Medium),
            (400, SizeBin::Large),
            (10000, SizeBin::Large),
        ];
        for (v, bin) in cases {
            assert_eq!(categorize(v), bin, "{v}");
        }
    }

    #[test]
    fn bins_partition() {
        for v in 1..1000 {
            let hits: Vec<_> = SizeBin::ALL
                .iter()
                .filter(|b| v >= b.lower_vox() && b.upper_vox().is_none_or(|u| v < u))
                .collect();
            assert_eq!(hits, vec![&categorize(v)]);
        }
    }

    fn fp(pv: usize) -> LesionRecord {
        LesionRecord {
            lesion_id: 1,
            status: LesionStatus::FP,
            gt_id: None,
            pred_id: Some(1),
            gt_vox: None,
            pred_vox: Some(pv),
            size_bin: categorize(pv),
            dice: None,
            iou: None,
            hd95: None,
            assd: None,
            size_ratio: None,
            volume_error_rel: None,
        }
    }

    #[test]
    fn lone_false_positive_bin() {
        let bins = stratify_records(&[fp(50)]);
        let small = &bins[1];
        assert_eq!(small.detection.precision, Some(0.0));
        assert_eq!(small.detection.recall, None);
        assert_eq!(small.detection.f1, None);
        assert_eq!(small.hd95_mean, None);
        assert_eq!(small.dice_mean, None);
        assert_eq!(small.n_gt, 0);
    }

    #[test]
    fn stratum_serializes_as_key() {
        assert_eq!(serde_json::to_string(&Stratum::All).unwrap(), "\"all\"");
        assert_eq!(serde_json::to_string(&Stratum::Bin(SizeBin::VerySmall)).unwrap(), "\"very_small\"");
    }
}
