//! Greedy one-to-one matching, step by step.
//!
//! GT lesion 2 overlaps prediction 1 better than prediction 2 does, but
//! prediction 1 is taken first by GT lesion 1, whose overlap is higher
//! still. Lesion 2 then falls back to prediction 2.

use lesion_eval::matching::{greedy_match, greedy_match_traced, CandidatePair};

fn main() {
    let candidates = [
        CandidatePair { gt_id: 2, pred_id: 2, iou: 0.4 },
        CandidatePair { gt_id: 1, pred_id: 1, iou: 0.6 },
        CandidatePair { gt_id: 2, pred_id: 1, iou: 0.5 },
    ];
    for entry in greedy_match_traced(&candidates) {
        println!("{entry}");
    }
    let matched: Vec<_> = greedy_match(&candidates).iter().map(|m| (m.gt_id, m.pred_id)).collect();
    println!("matches: {matched:?}");

    // Raising the threshold removes the weakest candidate before matching,
    // so GT lesion 2 is left unmatched.
    let strict: Vec<_> = candidates.iter().copied().filter(|c| c.iou > 0.45).collect();
    let matched: Vec<_> = greedy_match(&strict).iter().map(|m| (m.gt_id, m.pred_id)).collect();
    println!("matches with tau 0.45: {matched:?}");
}
