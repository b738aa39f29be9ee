//! Synthetic lesion masks with known correspondences, and the IoU-threshold
//! sweep that scores matching against them.
//!
//! Generation is a pure function of `(params, seed)`. The generator is
//! SplitMix64 (Steele, Lea & Flood 2014), with floats taken from the top 53
//! bits and integer ranges by modulo, so cases can be regenerated from a
//! seed by any implementation.
//!
//! Ground-truth lesions are axis-aligned boxes or digital ellipsoids placed
//! with a clearance of `min_gap` voxels between bounding boxes. The
//! prediction is built from per-lesion perturbations plus optional spurious
//! blobs. After component extraction each prediction component is credited
//! to the largest GT lesion that contributed voxels to it, and each GT
//! lesion keeps only its largest credited component; those pairs are the
//! case's truth pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::components::{find_connected_components, Connectivity, LesionSet};
use crate::error::{Error, Result};
use crate::matching::match_lesions;
use crate::stratify::SizeBin;
use crate::volume::{read_volume, write_volume, Volume};

/// SplitMix64 pseudorandom generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform-ish in [0, n); `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Inclusive integer range.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as usize) as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    /// Translate by a random offset in [-max, max] per axis.
    Shift { max: usize },
    /// Face-neighbor dilation, `radius` iterations.
    Dilate { radius: usize },
    /// Face-neighbor erosion, `radius` iterations.
    Erode { radius: usize },
    /// Cut the lesion in two by removing a plane through its middle.
    Split,
    /// Bridge the lesion to its nearest neighbor.
    Merge,
    /// Remove the lesion from the prediction.
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRule {
    pub perturbation: Perturbation,
    /// Chance of applying to each lesion.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    /// GT lesion count for each size bin, smallest bin first.
    pub lesions_per_bin: [usize; 4],
    /// Upper voxel count for generated large lesions.
    pub max_large_vox: usize,
    /// Rules are tried in order for every lesion.
    pub perturbations: Vec<PerturbationRule>,
    /// Extra prediction blobs with no GT counterpart.
    pub spurious: usize,
    pub min_gap: usize,
    pub max_attempts: usize,
    pub connectivity: Connectivity,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            dims: [96, 96, 1],
            spacing: [1.0; 3],
            lesions_per_bin: [4, 4, 2, 1],
            max_large_vox: 900,
            perturbations: vec![
                PerturbationRule { perturbation: Perturbation::Shift { max: 1 }, probability: 0.4 },
                PerturbationRule { perturbation: Perturbation::Dilate { radius: 1 }, probability: 0.2 },
                PerturbationRule { perturbation: Perturbation::Erode { radius: 1 }, probability: 0.2 },
                PerturbationRule { perturbation: Perturbation::Split, probability: 0.05 },
                PerturbationRule { perturbation: Perturbation::Merge, probability: 0.05 },
                PerturbationRule { perturbation: Perturbation::Drop, probability: 0.1 },
            ],
            spurious: 2,
            min_gap: 2,
            max_attempts: 2000,
            connectivity: Connectivity::Six,
        }
    }
}

impl SynthParams {
    /// Same layout, prediction identical to the ground truth.
    pub fn unperturbed(&self) -> Self {
        SynthParams {
            perturbations: Vec::new(),
            spurious: 0,
            ..self.clone()
        }
    }

    fn is_2d(&self) -> bool {
        self.dims[2] == 1
    }

    fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::Config(format!("grid dims must be positive: {:?}", self.dims)));
        }
        if self.max_large_vox < 400 {
            return Err(Error::Config("max_large_vox must be at least 400".into()));
        }
        for r in &self.perturbations {
            if !(0.0..=1.0).contains(&r.probability) {
                return Err(Error::Config(format!("probability out of range: {}", r.probability)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationLog {
    /// GT lesion id after component extraction.
    pub gt_id: u32,
    pub size_bin: SizeBin,
    pub applied: Vec<Perturbation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCase {
    pub seed: u64,
    pub connectivity: Connectivity,
    pub gt: Volume,
    pub pred: Volume,
    /// (GT lesion id, prediction lesion id), ascending by GT id.
    pub truth_pairs: Vec<(u32, u32)>,
    pub perturbation_log: Vec<PerturbationLog>,
}

type Offset = [i64; 3];

struct Shape {
    bin: SizeBin,
    /// Local coordinates, min corner at 0.
    voxels: Vec<Offset>,
    extent: [usize; 3],
}

fn normalize(mut voxels: Vec<Offset>) -> Shape {
    let mut min = [i64::MAX; 3];
    let mut max = [i64::MIN; 3];
    for v in &voxels {
        for a in 0..3 {
            min[a] = min[a].min(v[a]);
            max[a] = max[a].max(v[a]);
        }
    }
    for v in &mut voxels {
        for a in 0..3 {
            v[a] -= min[a];
        }
    }
    Shape {
        bin: SizeBin::VerySmall,
        extent: [
            (max[0] - min[0] + 1) as usize,
            (max[1] - min[1] + 1) as usize,
            (max[2] - min[2] + 1) as usize,
        ],
        voxels,
    }
}

fn box_shape(ext: [usize; 3]) -> Vec<Offset> {
    let mut out = Vec::with_capacity(ext.iter().product());
    for z in 0..ext[2] as i64 {
        for y in 0..ext[1] as i64 {
            for x in 0..ext[0] as i64 {
                out.push([x, y, z]);
            }
        }
    }
    out
}

/// Lattice points of an axis-aligned ellipsoid centered on a voxel.
fn ellipsoid_shape(radii: [f64; 3]) -> Vec<Offset> {
    let r = radii.map(|x| x.ceil() as i64);
    let mut out = Vec::new();
    for z in -r[2]..=r[2] {
        for y in -r[1]..=r[1] {
            for x in -r[0]..=r[0] {
                let q = [x, y, z]
                    .iter()
                    .zip(radii)
                    .map(|(&c, rad)| if rad > 0.0 { (c as f64 / rad).powi(2) } else if c == 0 { 0.0 } else { f64::INFINITY })
                    .sum::<f64>();
                if q <= 1.0 {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

fn bin_range(bin: SizeBin, max_large: usize) -> (usize, usize) {
    (bin.lower_vox(), bin.upper_vox().unwrap_or(max_large + 1))
}

fn make_shape(rng: &mut SplitMix64, bin: SizeBin, params: &SynthParams) -> Option<Shape> {
    let (lo, hi) = bin_range(bin, params.max_large_vox);
    let d = if params.is_2d() { 2 } else { 3 };
    let fits = |s: &Shape| (0..3).all(|a| s.extent[a] <= params.dims[a]);
    for _ in 0..64 {
        let target = (lo + rng.below(hi - lo)) as f64;
        let voxels = if rng.below(2) == 0 {
            let side = target.powf(1.0 / d as f64);
            let mut ext = [1usize; 3];
            for e in ext.iter_mut().take(d - 1) {
                *e = ((side * (0.75 + 0.5 * rng.next_f64())).round() as usize).max(1);
            }
            let rest: usize = ext.iter().take(d - 1).product();
            ext[d - 1] = ((target / rest as f64).round() as usize).max(1);
            box_shape(ext)
        } else {
            let r = if d == 2 {
                (target / std::f64::consts::PI).sqrt()
            } else {
                (3.0 * target / (4.0 * std::f64::consts::PI)).cbrt()
            };
            let mut radii = [0.0; 3];
            for rad in radii.iter_mut().take(d) {
                *rad = r * (0.75 + 0.5 * rng.next_f64());
            }
            ellipsoid_shape(radii)
        };
        let n = voxels.len();
        let mut shape = normalize(voxels);
        shape.bin = bin;
        if n >= lo && n < hi && fits(&shape) {
            return Some(shape);
        }
    }
    // rod of exactly `lo` voxels
    let mut ext = [1usize; 3];
    let axis = (0..3).max_by_key(|&a| params.dims[a]).unwrap_or(0);
    ext[axis] = lo;
    let mut shape = normalize(box_shape(ext));
    shape.bin = bin;
    fits(&shape).then_some(shape)
}

#[derive(Clone, Copy)]
struct Placed {
    origin: Offset,
    extent: [usize; 3],
}

impl Placed {
    fn clashes(&self, other: &Placed, gap: usize) -> bool {
        (0..3).all(|a| {
            let (s0, s1) = (self.origin[a], self.origin[a] + self.extent[a] as i64 - 1);
            let (o0, o1) = (other.origin[a], other.origin[a] + other.extent[a] as i64 - 1);
            s0 <= o1 + gap as i64 && o0 <= s1 + gap as i64
        })
    }

    fn center(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.origin[a] as f64 + (self.extent[a] as f64 - 1.0) / 2.0)
    }
}

fn place(
    rng: &mut SplitMix64,
    extent: [usize; 3],
    taken: &[Placed],
    params: &SynthParams,
    lesion: usize,
) -> Result<Placed> {
    for _ in 0..params.max_attempts {
        let mut origin = [0i64; 3];
        for a in 0..3 {
            let room = params.dims[a] - extent[a];
            origin[a] = rng.below(room + 1) as i64;
        }
        let cand = Placed { origin, extent };
        if !taken.iter().any(|t| t.clashes(&cand, params.min_gap)) {
            return Ok(cand);
        }
    }
    Err(Error::PlacementFailure {
        lesion,
        attempts: params.max_attempts,
    })
}

fn neighbors(v: Offset, planar: bool) -> impl Iterator<Item = Offset> {
    let steps: &'static [[i64; 3]] = if planar {
        &[[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]]
    } else {
        &[[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    };
    steps.iter().map(move |s| [v[0] + s[0], v[1] + s[1], v[2] + s[2]])
}

fn dilate(piece: &BTreeSet<Offset>, planar: bool) -> BTreeSet<Offset> {
    let mut out = piece.clone();
    for &v in piece {
        out.extend(neighbors(v, planar));
    }
    out
}

fn erode(piece: &BTreeSet<Offset>, planar: bool) -> BTreeSet<Offset> {
    piece
        .iter()
        .copied()
        .filter(|&v| neighbors(v, planar).all(|n| piece.contains(&n)))
        .collect()
}

/// Remove the middle plane along the longest axis; `None` if one side would
/// be empty.
fn split(piece: &BTreeSet<Offset>) -> Option<(BTreeSet<Offset>, BTreeSet<Offset>)> {
    let mut min = [i64::MAX; 3];
    let mut max = [i64::MIN; 3];
    for v in piece {
        for a in 0..3 {
            min[a] = min[a].min(v[a]);
            max[a] = max[a].max(v[a]);
        }
    }
    let axis = (0..3).max_by_key(|&a| (max[a] - min[a], std::cmp::Reverse(a)))?;
    let cut = (min[axis] + max[axis]).div_euclid(2);
    let lower: BTreeSet<_> = piece.iter().copied().filter(|v| v[axis] < cut).collect();
    let upper: BTreeSet<_> = piece.iter().copied().filter(|v| v[axis] > cut).collect();
    (!lower.is_empty() && !upper.is_empty()).then_some((lower, upper))
}

fn line(from: [f64; 3], to: [f64; 3]) -> BTreeSet<Offset> {
    let steps = (0..3).map(|a| (to[a] - from[a]).abs().ceil() as usize).max().unwrap_or(0).max(1);
    let mut out = BTreeSet::new();
    let mut prev: Option<Offset> = None;
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let p = [0, 1, 2].map(|a| (from[a] + (to[a] - from[a]) * t).round() as i64);
        // keep the path face-connected
        if let Some(mut q) = prev {
            for a in 0..3 {
                while q[a] != p[a] {
                    q[a] += (p[a] - q[a]).signum();
                    out.insert(q);
                }
            }
        }
        out.insert(p);
        prev = Some(p);
    }
    out
}

struct Piece {
    origin: Option<usize>,
    voxels: BTreeSet<Offset>,
}

fn rasterize(dims: [usize; 3], pieces: &[Piece]) -> Vec<u8> {
    let mut mask = vec![0u8; dims.iter().product()];
    for p in pieces {
        for v in &p.voxels {
            if let Some(i) = linear(dims, *v) {
                mask[i] = 1;
            }
        }
    }
    mask
}

fn linear(dims: [usize; 3], v: Offset) -> Option<usize> {
    if (0..3).all(|a| v[a] >= 0 && (v[a] as usize) < dims[a]) {
        Some(v[0] as usize + dims[0] * (v[1] as usize + dims[1] * v[2] as usize))
    } else {
        None
    }
}

/// Generate one case.
pub fn generate_case(params: &SynthParams, seed: u64) -> Result<SynthCase> {
    params.validate()?;
    let mut rng = SplitMix64::new(seed);
    let planar = params.is_2d();

    // Largest lesions first so they find room.
    let mut shapes = Vec::new();
    for (k, &bin) in SizeBin::ALL.iter().enumerate().rev() {
        for _ in 0..params.lesions_per_bin[k] {
            let shape = make_shape(&mut rng, bin, params).ok_or(Error::PlacementFailure {
                lesion: shapes.len(),
                attempts: 64,
            })?;
            shapes.push(shape);
        }
    }
    let mut placed: Vec<Placed> = Vec::new();
    for (i, s) in shapes.iter().enumerate() {
        let p = place(&mut rng, s.extent, &placed, params, i)?;
        placed.push(p);
    }
    let gt_abs: Vec<BTreeSet<Offset>> = shapes
        .iter()
        .zip(&placed)
        .map(|(s, p)| {
            s.voxels
                .iter()
                .map(|v| [v[0] + p.origin[0], v[1] + p.origin[1], v[2] + p.origin[2]])
                .collect()
        })
        .collect();

    let mut pieces: Vec<Piece> = Vec::new();
    let mut applied_log: Vec<Vec<Perturbation>> = Vec::new();
    for i in 0..shapes.len() {
        let mut parts: Vec<BTreeSet<Offset>> = vec![gt_abs[i].clone()];
        let mut applied = Vec::new();
        for rule in &params.perturbations {
            if rng.next_f64() >= rule.probability {
                continue;
            }
            let done = match rule.perturbation {
                Perturbation::Shift { max } => {
                    let m = max as i64;
                    let d = [rng.range(-m, m), rng.range(-m, m), if planar { 0 } else { rng.range(-m, m) }];
                    for part in &mut parts {
                        *part = part.iter().map(|v| [v[0] + d[0], v[1] + d[1], v[2] + d[2]]).collect();
                    }
                    true
                }
                Perturbation::Dilate { radius } => {
                    for part in &mut parts {
                        for _ in 0..radius {
                            *part = dilate(part, planar);
                        }
                    }
                    true
                }
                Perturbation::Erode { radius } => {
                    for part in &mut parts {
                        for _ in 0..radius {
                            *part = erode(part, planar);
                        }
                    }
                    parts.retain(|p| !p.is_empty());
                    true
                }
                Perturbation::Split => {
                    let largest = (0..parts.len()).max_by_key(|&k| (parts[k].len(), std::cmp::Reverse(k)));
                    match largest.and_then(|k| split(&parts[k]).map(|halves| (k, halves))) {
                        Some((k, (a, b))) => {
                            parts[k] = a;
                            parts.push(b);
                            true
                        }
                        None => false,
                    }
                }
                Perturbation::Merge => {
                    let me = placed[i].center();
                    let nearest = (0..placed.len()).filter(|&j| j != i).min_by(|&a, &b| {
                        let da = dist2(me, placed[a].center());
                        let db = dist2(me, placed[b].center());
                        da.total_cmp(&db).then(a.cmp(&b))
                    });
                    match nearest {
                        Some(j) => {
                            parts.push(line(me, placed[j].center()));
                            true
                        }
                        None => false,
                    }
                }
                Perturbation::Drop => {
                    parts.clear();
                    true
                }
            };
            if done {
                applied.push(rule.perturbation);
            }
        }
        pieces.extend(parts.into_iter().map(|voxels| Piece { origin: Some(i), voxels }));
        applied_log.push(applied);
    }

    // Spurious blobs go where no GT lesion is.
    let mut occupied = placed.clone();
    for k in 0..params.spurious {
        let bin = if rng.below(2) == 0 { SizeBin::VerySmall } else { SizeBin::Small };
        let shape = make_shape(&mut rng, bin, params).ok_or(Error::PlacementFailure {
            lesion: shapes.len() + k,
            attempts: 64,
        })?;
        let p = place(&mut rng, shape.extent, &occupied, params, shapes.len() + k)?;
        occupied.push(p);
        pieces.push(Piece {
            origin: None,
            voxels: shape
                .voxels
                .iter()
                .map(|v| [v[0] + p.origin[0], v[1] + p.origin[1], v[2] + p.origin[2]])
                .collect(),
        });
    }

    let dims = params.dims;
    let gt_pieces: Vec<Piece> = gt_abs
        .iter()
        .enumerate()
        .map(|(i, v)| Piece { origin: Some(i), voxels: v.clone() })
        .collect();
    let gt = Volume::from_mask(dims, params.spacing, rasterize(dims, &gt_pieces))?;
    let pred = Volume::from_mask(dims, params.spacing, rasterize(dims, &pieces))?;

    let gt_set = find_connected_components(&gt, params.connectivity)?;
    let pred_set = find_connected_components(&pred, params.connectivity)?;
    let gt_id_of: Vec<u32> = gt_abs
        .iter()
        .map(|s| {
            let first = *s.iter().next().expect("shapes are non-empty");
            gt_set.label_map[linear(dims, first).expect("GT lesions lie inside the grid")]
        })
        .collect();

    let truth_pairs = assign_truth(&pieces, &gt_abs, &gt_id_of, &pred_set, dims);
    let mut perturbation_log: Vec<PerturbationLog> = applied_log
        .into_iter()
        .enumerate()
        .map(|(i, applied)| PerturbationLog {
            gt_id: gt_id_of[i],
            size_bin: shapes[i].bin,
            applied,
        })
        .collect();
    perturbation_log.sort_by_key(|l| l.gt_id);

    Ok(SynthCase {
        seed,
        connectivity: params.connectivity,
        gt,
        pred,
        truth_pairs,
        perturbation_log,
    })
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

fn assign_truth(
    pieces: &[Piece],
    gt_abs: &[BTreeSet<Offset>],
    gt_id_of: &[u32],
    pred_set: &LesionSet,
    dims: [usize; 3],
) -> Vec<(u32, u32)> {
    // prediction component -> contributing GT lesion indices
    let mut origins: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
    for p in pieces {
        let Some(i) = p.origin else { continue };
        for v in &p.voxels {
            if let Some(k) = linear(dims, *v) {
                let label = pred_set.label_map[k];
                if label != 0 {
                    origins.entry(label).or_default().insert(i);
                }
            }
        }
    }
    // GT index -> credited components
    let mut credited: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for (label, from) in origins {
        let best = from
            .iter()
            .copied()
            .max_by_key(|&i| (gt_abs[i].len(), std::cmp::Reverse(i)))
            .expect("non-empty origin set");
        credited.entry(best).or_default().push(label);
    }
    let mut pairs: Vec<(u32, u32)> = credited
        .into_iter()
        .map(|(i, labels)| {
            let keep = labels
                .into_iter()
                .max_by_key(|&l| (pred_set.get(l).map_or(0, |x| x.volume_vox()), std::cmp::Reverse(l)))
                .expect("non-empty credit list");
            (gt_id_of[i], keep)
        })
        .collect();
    pairs.sort_unstable();
    pairs
}

/// F1 of produced matches against truth pairs for every threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauSweepResult {
    pub taus: Vec<f64>,
    pub f1_at_tau: Vec<f64>,
    pub best_tau: f64,
}

/// 0.05, 0.10, …, 0.95.
pub fn default_sweep_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}

/// Micro-averaged F1 over cases: a produced match is correct iff it is one
/// of the case's truth pairs. With nothing to find and nothing produced the
/// score is 1.
pub fn tau_sweep(cases: &[SynthCase], taus: &[f64]) -> Result<TauSweepResult> {
    if cases.is_empty() {
        return Err(Error::Config("tau sweep needs at least one case".into()));
    }
    if taus.is_empty() {
        return Err(Error::Config("tau sweep needs at least one threshold".into()));
    }
    if taus.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("taus must be sorted ascending".into()));
    }
    type Extracted = (LesionSet, LesionSet, BTreeSet<(u32, u32)>);
    let extracted: Vec<Extracted> = cases
        .par_iter()
        .map(|c| -> Result<_> {
            Ok((
                find_connected_components(&c.gt, c.connectivity)?,
                find_connected_components(&c.pred, c.connectivity)?,
                c.truth_pairs.iter().copied().collect(),
            ))
        })
        .collect::<Result<_>>()?;

    let f1_at_tau: Vec<f64> = taus
        .par_iter()
        .map(|&tau| {
            let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
            for (gt, pred, truth) in &extracted {
                let m = match_lesions(gt, pred, tau);
                let correct = m.matches.iter().filter(|x| truth.contains(&(x.gt_id, x.pred_id))).count();
                tp += correct;
                fp += m.matches.len() - correct;
                fn_ += truth.len() - correct;
            }
            let denom = 2 * tp + fp + fn_;
            if denom == 0 {
                1.0
            } else {
                2.0 * tp as f64 / denom as f64
            }
        })
        .collect();

    let best = f1_at_tau.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best_tau = taus[f1_at_tau.iter().position(|&f| f == best).unwrap_or(0)];
    Ok(TauSweepResult {
        taus: taus.to_vec(),
        f1_at_tau,
        best_tau,
    })
}

#[derive(Serialize, Deserialize)]
struct TruthSidecar {
    seed: u64,
    connectivity: Connectivity,
    truth_pairs: Vec<(u32, u32)>,
    perturbation_log: Vec<PerturbationLog>,
}

/// Write `<name>_gt.json`, `<name>_pred.json` and `<name>_truth.json`.
pub fn export_case(case: &SynthCase, dir: &Path, name: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let gt = dir.join(format!("{name}_gt.json"));
    let pred = dir.join(format!("{name}_pred.json"));
    let truth = dir.join(format!("{name}_truth.json"));
    write_volume(&case.gt, &gt)?;
    write_volume(&case.pred, &pred)?;
    let sidecar = TruthSidecar {
        seed: case.seed,
        connectivity: case.connectivity,
        truth_pairs: case.truth_pairs.clone(),
        perturbation_log: case.perturbation_log.clone(),
    };
    let text = serde_json::to_string_pretty(&sidecar)?;
    fs::write(&truth, text).map_err(|e| Error::io(&truth, e))?;
    Ok(vec![gt, pred, truth])
}

pub fn import_case(dir: &Path, name: &str) -> Result<SynthCase> {
    let truth_path = dir.join(format!("{name}_truth.json"));
    let text = fs::read_to_string(&truth_path).map_err(|e| Error::io(&truth_path, e))?;
    let sidecar: TruthSidecar = serde_json::from_str(&text)?;
    Ok(SynthCase {
        seed: sidecar.seed,
        connectivity: sidecar.connectivity,
        gt: read_volume(dir.join(format!("{name}_gt.json")))?,
        pred: read_volume(dir.join(format!("{name}_pred.json")))?,
        truth_pairs: sidecar.truth_pairs,
        perturbation_log: sidecar.perturbation_log,
    })
}

/// Every exported case in `dir`, by name.
pub fn import_cases(dir: &Path) -> Result<Vec<SynthCase>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if let Some(name) = entry.file_name().to_str().and_then(|n| n.strip_suffix("_truth.json")) {
            names.push(name.to_string());
        }
    }
    names.sort();
    names.iter().map(|n| import_case(dir, n)).collect()
}
