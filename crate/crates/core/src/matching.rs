//! One-to-one lesion correspondence by greedy IoU matching.
//!
//! Candidates are GT/prediction pairs whose bounding boxes intersect and
//! whose IoU is strictly greater than `tau`. They are visited by descending
//! IoU (ties broken by GT id, then prediction id) and a pair is accepted only
//! when neither lesion has been matched yet.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::components::{scan_key, BBox, Lesion, LesionSet};

/// IoU threshold used unless overridden.
pub const DEFAULT_TAU: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidatePair {
    pub gt_id: u32,
    pub pred_id: u32,
    pub iou: f64,
}

/// An accepted correspondence.
pub type Match = CandidatePair;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchSet {
    /// In acceptance order.
    pub matches: Vec<Match>,
    /// False negatives, ascending id.
    pub unmatched_gt: Vec<u32>,
    /// False positives, ascending id.
    pub unmatched_pred: Vec<u32>,
    pub tau: f64,
}

impl MatchSet {
    pub fn pred_for(&self, gt_id: u32) -> Option<&Match> {
        self.matches.iter().find(|m| m.gt_id == gt_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceOutcome {
    Accepted,
    GtLocked,
    PredLocked,
    BothLocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub candidate: CandidatePair,
    pub outcome: TraceOutcome,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.candidate;
        let what = match self.outcome {
            TraceOutcome::Accepted => "accepted",
            TraceOutcome::GtLocked => "skipped (gt already matched)",
            TraceOutcome::PredLocked => "skipped (prediction already matched)",
            TraceOutcome::BothLocked => "skipped (both already matched)",
        };
        write!(f, "gt {} pred {} iou {:.6}: {what}", c.gt_id, c.pred_id, c.iou)
    }
}

pub fn bbox_overlap(a: &BBox, b: &BBox) -> bool {
    a.overlaps(b)
}

/// (intersection, union) voxel counts of two lesions.
pub fn overlap_counts(a: &Lesion, b: &Lesion) -> (usize, usize) {
    let (mut i, mut j, mut inter) = (0, 0, 0);
    while i < a.voxels.len() && j < b.voxels.len() {
        match scan_key(a.voxels[i]).cmp(&scan_key(b.voxels[j])) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    (inter, a.voxels.len() + b.voxels.len() - inter)
}

/// Voxel-count IoU; 0 when both lesions are empty.
pub fn compute_iou(a: &Lesion, b: &Lesion) -> f64 {
    let (inter, union) = overlap_counts(a, b);
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// All pairs with intersecting bounding boxes and IoU > `tau`, in
/// (gt_id, pred_id) order.
pub fn generate_candidates(gt: &LesionSet, pred: &LesionSet, tau: f64) -> Vec<CandidatePair> {
    candidates_with(gt, pred, tau, true)
}

/// Same result as [`generate_candidates`] but computes IoU for every pair.
pub fn generate_candidates_unfiltered(
    gt: &LesionSet,
    pred: &LesionSet,
    tau: f64,
) -> Vec<CandidatePair> {
    candidates_with(gt, pred, tau, false)
}

fn candidates_with(gt: &LesionSet, pred: &LesionSet, tau: f64, bbox_filter: bool) -> Vec<CandidatePair> {
    // With tau >= 0 only lesions sharing a voxel can qualify, and those are
    // found through the prediction label map without scanning every pair.
    let indexed = gt.dims == pred.dims && pred.label_map.len() == pred.dims.iter().product::<usize>();
    if bbox_filter && tau >= 0.0 && indexed {
        return candidates_by_lookup(gt, pred, tau);
    }
    let mut out = Vec::new();
    for g in &gt.lesions {
        for p in &pred.lesions {
            if bbox_filter && !bbox_overlap(&g.bbox, &p.bbox) {
                continue;
            }
            let iou = compute_iou(g, p);
            if iou > tau {
                out.push(CandidatePair {
                    gt_id: g.id,
                    pred_id: p.id,
                    iou,
                });
            }
        }
    }
    out
}

fn candidates_by_lookup(gt: &LesionSet, pred: &LesionSet, tau: f64) -> Vec<CandidatePair> {
    let [nx, ny, _] = pred.dims;
    let mut out = Vec::new();
    let mut hits = Vec::new();
    for g in &gt.lesions {
        hits.clear();
        hits.extend(
            g.voxels
                .iter()
                .map(|v| pred.label_map[v[0] + nx * (v[1] + ny * v[2])])
                .filter(|&l| l != 0),
        );
        hits.sort_unstable();
        hits.dedup();
        for &id in &hits {
            let Some(p) = pred.get(id) else { continue };
            if !bbox_overlap(&g.bbox, &p.bbox) {
                continue;
            }
            let iou = compute_iou(g, p);
            if iou > tau {
                out.push(CandidatePair {
                    gt_id: g.id,
                    pred_id: p.id,
                    iou,
                });
            }
        }
    }
    out
}

/// Sort key: descending IoU, then ascending GT id, then ascending prediction id.
pub fn candidate_order(a: &CandidatePair, b: &CandidatePair) -> Ordering {
    b.iou
        .total_cmp(&a.iou)
        .then(a.gt_id.cmp(&b.gt_id))
        .then(a.pred_id.cmp(&b.pred_id))
}

/// Greedy one-to-one selection; returns accepted pairs in acceptance order.
pub fn greedy_match(candidates: &[CandidatePair]) -> Vec<Match> {
    greedy_match_traced(candidates)
        .into_iter()
        .filter(|t| t.outcome == TraceOutcome::Accepted)
        .map(|t| t.candidate)
        .collect()
}

/// Greedy selection with one trace entry per candidate, in visiting order.
pub fn greedy_match_traced(candidates: &[CandidatePair]) -> Vec<TraceEntry> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(candidate_order);

    let max_gt = sorted.iter().map(|c| c.gt_id).max().unwrap_or(0) as usize;
    let max_pred = sorted.iter().map(|c| c.pred_id).max().unwrap_or(0) as usize;
    let mut gt_locked = vec![false; max_gt + 1];
    let mut pred_locked = vec![false; max_pred + 1];

    sorted
        .into_iter()
        .map(|c| {
            let g = gt_locked[c.gt_id as usize];
            let p = pred_locked[c.pred_id as usize];
            let outcome = match (g, p) {
                (false, false) => {
                    gt_locked[c.gt_id as usize] = true;
                    pred_locked[c.pred_id as usize] = true;
                    TraceOutcome::Accepted
                }
                (true, false) => TraceOutcome::GtLocked,
                (false, true) => TraceOutcome::PredLocked,
                (true, true) => TraceOutcome::BothLocked,
            };
            TraceEntry {
                candidate: c,
                outcome,
            }
        })
        .collect()
}

/// Candidates, greedy selection and the FP/FN residues.
pub fn match_lesions(gt: &LesionSet, pred: &LesionSet, tau: f64) -> MatchSet {
    let matches = greedy_match(&generate_candidates(gt, pred, tau));
    complete_match_set(gt, pred, matches, tau)
}

pub(crate) fn complete_match_set(gt: &LesionSet, pred: &LesionSet, matches: Vec<Match>, tau: f64) -> MatchSet {
    let mut gt_hit = vec![false; gt.len() + 1];
    let mut pred_hit = vec![false; pred.len() + 1];
    for m in &matches {
        gt_hit[m.gt_id as usize] = true;
        pred_hit[m.pred_id as usize] = true;
    }
    MatchSet {
        unmatched_gt: gt.lesions.iter().map(|l| l.id).filter(|&id| !gt_hit[id as usize]).collect(),
        unmatched_pred: pred
            .lesions
            .iter()
            .map(|l| l.id)
            .filter(|&id| !pred_hit[id as usize])
            .collect(),
        matches,
        tau,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::{find_connected_components, Connectivity};
    use crate::volume::Volume;

    fn lesion(id: u32, voxels: Vec<[usize; 3]>) -> Lesion {
        Lesion::from_voxels(id, voxels, [1.0; 3]).unwrap()
    }

    fn square(x0: usize) -> Lesion {
        lesion(1, vec![[x0, 0, 0], [x0 + 1, 0, 0], [x0, 1, 0], [x0 + 1, 1, 0]])
    }

    fn set_from(dims: [usize; 3], voxels: &[[usize; 3]]) -> LesionSet {
        let mut data = vec![0u8; dims.iter().product()];
        for v in voxels {
            data[v[0] + dims[0] * (v[1] + dims[1] * v[2])] = 1;
        }
        find_connected_components(&Volume::from_mask(dims, [1.0; 3], data).unwrap(), Connectivity::Six).unwrap()
    }

    fn c(gt_id: u32, pred_id: u32, iou: f64) -> CandidatePair {
        CandidatePair { gt_id, pred_id, iou }
    }

    #[test]
    fn bbox_cases() {
        let a = BBox { min: [0, 0, 0], max: [1, 1, 1] };
        assert!(bbox_overlap(&a, &a));
        assert!(!bbox_overlap(&a, &BBox { min: [3, 0, 0], max: [4, 1, 1] }));
        assert!(bbox_overlap(&a, &BBox { min: [1, 0, 0], max: [2, 1, 1] }));
    }

    #[test]
    fn iou_cases() {
        assert_eq!(compute_iou(&square(0), &square(0)), 1.0);
        assert_eq!(compute_iou(&square(0), &square(5)), 0.0);
        // intersection 2, union 6
        assert_eq!(overlap_counts(&square(0), &square(1)), (2, 6));
        assert_eq!(compute_iou(&square(0), &square(1)), 1.0 / 3.0);
    }

    #[test]
    fn tau_is_strict() {
        let gt = set_from([4, 2, 1], &[[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]);
        let pred = set_from([4, 2, 1], &[[1, 0, 0], [2, 0, 0], [1, 1, 0], [2, 1, 0]]);
        assert!(generate_candidates(&gt, &pred, 0.35).is_empty());
        assert_eq!(generate_candidates(&gt, &pred, 0.30).len(), 1);
        // exactly 1/3 is not > 1/3
        assert!(generate_candidates(&gt, &pred, 1.0 / 3.0).is_empty());
    }

    #[test]
    fn empty_prediction_no_candidates() {
        let gt = set_from([3, 3, 1], &[[0, 0, 0]]);
        let pred = set_from([3, 3, 1], &[]);
        assert!(generate_candidates(&gt, &pred, 0.1).is_empty());
        let m = match_lesions(&gt, &pred, 0.1);
        assert_eq!(m.unmatched_gt, vec![1]);
        assert!(m.matches.is_empty() && m.unmatched_pred.is_empty());
    }

    #[test]
    fn gt_overlapped_by_two_predictions() {
        // GT is a 4-voxel rod, predictions cover its two halves.
        let gt = set_from([4, 1, 1], &[[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]]);
        let pred = set_from([4, 1, 1], &[[0, 0, 0], [1, 0, 0], [3, 0, 0]]);
        let cands = generate_candidates(&gt, &pred, 0.2);
        assert_eq!(cands.len(), 2);
        let m = match_lesions(&gt, &pred, 0.2);
        assert_eq!(m.matches.len(), 1);
        assert_eq!(m.matches[0].pred_id, 1);
        assert_eq!(m.unmatched_pred, vec![2]);
    }

    #[test]
    fn greedy_skips_locked_prediction() {
        let cands = [c(2, 1, 0.5), c(1, 1, 0.6), c(2, 2, 0.4)];
        let got: Vec<_> = greedy_match(&cands).iter().map(|m| (m.gt_id, m.pred_id)).collect();
        assert_eq!(got, vec![(1, 1), (2, 2)]);

        let trace = greedy_match_traced(&cands);
        assert_eq!(trace[1].outcome, TraceOutcome::PredLocked);
        assert_eq!(trace[1].to_string(), "gt 2 pred 1 iou 0.500000: skipped (prediction already matched)");
    }

    #[test]
    fn single_candidate_accepted() {
        assert_eq!(greedy_match(&[c(1, 1, 0.9)]).len(), 1);
    }

    #[test]
    fn ties_resolved_by_ids() {
        let got = greedy_match(&[c(1, 2, 0.5), c(1, 1, 0.5)]);
        assert_eq!(got.len(), 1);
        assert_eq!((got[0].gt_id, got[0].pred_id), (1, 1));

        let got = greedy_match(&[c(2, 1, 0.5), c(1, 1, 0.5)]);
        assert_eq!((got[0].gt_id, got[0].pred_id), (1, 1));
    }

    #[test]
    fn identical_sets_fully_matched() {
        let vox = [[0, 0, 0], [2, 0, 0], [2, 1, 0], [0, 2, 0]];
        let gt = set_from([3, 3, 1], &vox);
        let m = match_lesions(&gt, &gt.clone(), DEFAULT_TAU);
        assert_eq!(m.matches.len(), gt.len());
        assert!(m.matches.iter().all(|m| m.iou == 1.0 && m.gt_id == m.pred_id));
        assert!(m.unmatched_gt.is_empty() && m.unmatched_pred.is_empty());
    }

    #[test]
    fn no_gt_means_all_fp() {
        let gt = set_from([3, 3, 1], &[]);
        let pred = set_from([3, 3, 1], &[[0, 0, 0], [2, 2, 0]]);
        let m = match_lesions(&gt, &pred, DEFAULT_TAU);
        assert_eq!(m.unmatched_pred, vec![1, 2]);
        assert!(m.unmatched_gt.is_empty());
    }
}
