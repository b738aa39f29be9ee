//! Slow, obviously-correct reference implementations used to cross-check
//! the fast paths in tests. Nothing here shares code with the modules it
//! checks.

use std::collections::{HashMap, HashSet, VecDeque};

/// Breadth-first flood fill. Labels start at 1 and follow the scan order of
/// each component's first voxel (x fastest, then y, then z).
pub fn flood_fill_labels(mask: &[bool], dims: [usize; 3], neighbors: usize) -> Vec<u32> {
    let [nx, ny, nz] = dims;
    let mut offsets = Vec::new();
    for dz in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let nonzero = (dx != 0) as usize + (dy != 0) as usize + (dz != 0) as usize;
                let keep = match neighbors {
                    6 => nonzero == 1,
                    18 => nonzero == 1 || nonzero == 2,
                    26 => nonzero >= 1,
                    _ => panic!("unsupported neighborhood {neighbors}"),
                };
                if keep {
                    offsets.push((dx, dy, dz));
                }
            }
        }
    }
    let mut labels = vec![0u32; mask.len()];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let x = (i % nx) as i64;
            let y = ((i / nx) % ny) as i64;
            let z = (i / (nx * ny)) as i64;
            for &(dx, dy, dz) in &offsets {
                let (a, b, c) = (x + dx, y + dy, z + dz);
                if a < 0 || b < 0 || c < 0 || a >= nx as i64 || b >= ny as i64 || c >= nz as i64 {
                    continue;
                }
                let j = a as usize + nx * (b as usize + ny * c as usize);
                if mask[j] && labels[j] == 0 {
                    labels[j] = next;
                    queue.push_back(j);
                }
            }
        }
    }
    labels
}

/// IoU of every overlapping label pair, from a joint histogram of two label
/// maps. Returns `(gt, pred, iou)` for all pairs with non-zero overlap.
pub fn iou_table(gt_labels: &[u32], pred_labels: &[u32]) -> Vec<(u32, u32, f64)> {
    let mut gt_size: HashMap<u32, usize> = HashMap::new();
    let mut pred_size: HashMap<u32, usize> = HashMap::new();
    let mut joint: HashMap<(u32, u32), usize> = HashMap::new();
    for (&g, &p) in gt_labels.iter().zip(pred_labels) {
        if g != 0 {
            *gt_size.entry(g).or_default() += 1;
        }
        if p != 0 {
            *pred_size.entry(p).or_default() += 1;
        }
        if g != 0 && p != 0 {
            *joint.entry((g, p)).or_default() += 1;
        }
    }
    joint
        .into_iter()
        .map(|((g, p), inter)| {
            let union = gt_size[&g] + pred_size[&p] - inter;
            (g, p, inter as f64 / union as f64)
        })
        .collect()
}

/// Exhaustive greedy one-to-one matching: repeatedly take the best
/// remaining pair above `tau` (ties: lower GT id, then lower prediction id).
pub fn naive_match(gt_labels: &[u32], pred_labels: &[u32], tau: f64) -> Vec<(u32, u32, f64)> {
    let mut table: Vec<_> = iou_table(gt_labels, pred_labels).into_iter().filter(|t| t.2 > tau).collect();
    let mut out = Vec::new();
    while !table.is_empty() {
        let best = table
            .iter()
            .copied()
            .reduce(|a, b| {
                if b.2 > a.2 || (b.2 == a.2 && (b.0, b.1) < (a.0, a.1)) {
                    b
                } else {
                    a
                }
            })
            .unwrap();
        out.push(best);
        table.retain(|t| t.0 != best.0 && t.1 != best.1);
    }
    out
}

/// Voxels of the set with a face neighbor outside it.
pub fn brute_surface(set: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let members: HashSet<[i64; 3]> = set.iter().map(|v| v.map(|c| c as i64)).collect();
    set.iter()
        .copied()
        .filter(|v| {
            let p = v.map(|c| c as i64);
            [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
                .iter()
                .any(|d| !members.contains(&[p[0] + d[0], p[1] + d[1], p[2] + d[2]]))
        })
        .collect()
}

/// Every surface voxel's distance to the nearest surface voxel of the other
/// set, both directions pooled, computed pairwise.
pub fn brute_pooled_distances(a: &[[usize; 3]], b: &[[usize; 3]], spacing: [f64; 3]) -> Vec<f64> {
    let sa = brute_surface(a);
    let sb = brute_surface(b);
    let nearest = |from: &[[usize; 3]], to: &[[usize; 3]]| -> Vec<f64> {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| {
                        (0..3)
                            .map(|k| ((p[k] as f64 - q[k] as f64) * spacing[k]).powi(2))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    };
    let mut d = nearest(&sa, &sb);
    d.extend(nearest(&sb, &sa));
    d
}

/// Linear-interpolation 95th percentile and mean of the pooled distances.
pub fn brute_hd95_assd(a: &[[usize; 3]], b: &[[usize; 3]], spacing: [f64; 3]) -> (f64, f64) {
    let mut d = brute_pooled_distances(a, b, spacing);
    d.sort_by(f64::total_cmp);
    let rank = 0.95 * (d.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(d.len() - 1);
    let hd95 = d[lo] + (rank - lo as f64) * (d[hi] - d[lo]);
    let assd = d.iter().sum::<f64>() / d.len() as f64;
    (hd95, assd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flood_fill_diagonal() {
        // two voxels touching at a corner
        let mut m = vec![false; 8];
        m[0] = true;
        m[7] = true;
        assert_eq!(flood_fill_labels(&m, [2, 2, 2], 6).iter().max(), Some(&2));
        assert_eq!(flood_fill_labels(&m, [2, 2, 2], 18).iter().max(), Some(&2));
        assert_eq!(flood_fill_labels(&m, [2, 2, 2], 26).iter().max(), Some(&1));
    }

    #[test]
    fn naive_match_prefers_higher_iou() {
        let g = [1, 1, 1, 1, 0, 0];
        let p = [1, 1, 2, 2, 2, 0];
        let m = naive_match(&g, &p, 0.1);
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].0, m[0].1), (1, 1));
    }

    #[test]
    fn brute_distances_single_voxels() {
        let (h, a) = brute_hd95_assd(&[[0, 0, 0]], &[[3, 4, 0]], [1.0; 3]);
        assert_eq!((h, a), (5.0, 5.0));
    }
}
