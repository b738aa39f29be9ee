//! Random inputs shared by the integration suites.
#![allow(dead_code)]

use std::path::Path;

use lesion_eval::synth::SplitMix64;
use lesion_eval::Volume;

pub type Voxel = [usize; 3];

pub fn idx(dims: [usize; 3], v: Voxel) -> usize {
    v[0] + dims[0] * (v[1] + dims[1] * v[2])
}

/// Independent Bernoulli voxels.
pub fn noise_mask(rng: &mut SplitMix64, dims: [usize; 3], density: f64) -> Vec<u8> {
    (0..dims.iter().product::<usize>()).map(|_| (rng.next_f64() < density) as u8).collect()
}

/// `mask` with every voxel flipped with probability `p`.
pub fn flipped(rng: &mut SplitMix64, mask: &[u8], p: f64) -> Vec<u8> {
    mask.iter().map(|&m| if rng.next_f64() < p { 1 - m } else { m }).collect()
}

/// `mask` translated by `d` voxels, zero-filled.
pub fn shifted(mask: &[u8], dims: [usize; 3], d: [i64; 3]) -> Vec<u8> {
    let mut out = vec![0u8; mask.len()];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                if mask[idx(dims, [x, y, z])] == 0 {
                    continue;
                }
                let t = [x as i64 + d[0], y as i64 + d[1], z as i64 + d[2]];
                if (0..3).all(|a| t[a] >= 0 && (t[a] as usize) < dims[a]) {
                    out[idx(dims, [t[0] as usize, t[1] as usize, t[2] as usize])] = 1;
                }
            }
        }
    }
    out
}

/// A random GT/prediction pair: noise GT, prediction mixes flips and a small
/// shift so that IoUs spread over (0, 1].
pub fn random_pair(rng: &mut SplitMix64, dims: [usize; 3], density: f64) -> (Vec<u8>, Vec<u8>) {
    let gt = noise_mask(rng, dims, density);
    let pred = match rng.below(3) {
        0 => {
            let p = 0.05 + 0.2 * rng.next_f64();
            flipped(rng, &gt, p)
        }
        1 => {
            let d = [rng.range(-1, 1), rng.range(-1, 1), rng.range(-1, 1)];
            shifted(&gt, dims, d)
        }
        _ => noise_mask(rng, dims, density),
    };
    (gt, pred)
}

pub fn fill_box(mask: &mut [u8], dims: [usize; 3], at: Voxel, ext: [usize; 3]) {
    for z in at[2]..at[2] + ext[2] {
        for y in at[1]..at[1] + ext[1] {
            for x in at[0]..at[0] + ext[0] {
                mask[idx(dims, [x, y, z])] = 1;
            }
        }
    }
}

/// Union of a few random balls and boxes inside a `side`³ grid.
pub fn random_blob(rng: &mut SplitMix64, side: usize) -> Vec<Voxel> {
    let dims = [side; 3];
    let mut mask = vec![0u8; side * side * side];
    for _ in 0..1 + rng.below(3) {
        let c = [rng.below(side), rng.below(side), rng.below(side)];
        let r = 1.0 + rng.next_f64() * side as f64 / 4.0;
        if rng.below(2) == 0 {
            for z in 0..side {
                for y in 0..side {
                    for x in 0..side {
                        let d2: f64 = [x, y, z].iter().zip(c).map(|(&a, b)| (a as f64 - b as f64).powi(2)).sum();
                        if d2 <= r * r {
                            mask[idx(dims, [x, y, z])] = 1;
                        }
                    }
                }
            }
        } else {
            let ext = [0, 1, 2].map(|a| (1 + rng.below(r as usize * 2)).min(side - c[a]));
            fill_box(&mut mask, dims, c, ext);
        }
    }
    let mut out = Vec::new();
    for z in 0..side {
        for y in 0..side {
            for x in 0..side {
                if mask[idx(dims, [x, y, z])] == 1 {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

pub fn mask_volume(dims: [usize; 3], mask: Vec<u8>) -> Volume {
    Volume::from_mask(dims, [1.0; 3], mask).unwrap()
}

/// Every file under `dir` as (relative path, bytes), sorted.
pub fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}
