//! Surface extraction and surface-to-surface distances.
//!
//! A surface voxel has at least one face neighbor outside the set (the grid
//! border counts as outside). Nearest-surface distances come from an exact
//! separable squared Euclidean distance transform with per-axis spacing,
//! evaluated over the bounding box of both shapes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::components::{scan_key, BBox, Voxel};
use crate::error::{Error, Result};
use crate::stats::percentile_sorted;

/// How the two directed distance lists are reduced to one HD95 value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hd95Variant {
    /// 95th percentile of the pooled symmetric multiset.
    #[default]
    Pooled,
    /// Max of the two directed 95th percentiles.
    MaxOfDirected,
}

impl fmt::Display for Hd95Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hd95Variant::Pooled => "pooled",
            Hd95Variant::MaxOfDirected => "max-of-directed",
        })
    }
}

impl FromStr for Hd95Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pooled" => Ok(Hd95Variant::Pooled),
            "max-of-directed" => Ok(Hd95Variant::MaxOfDirected),
            other => Err(format!("unknown hd95 variant {other:?}")),
        }
    }
}

/// Distance from every surface voxel of each set to the nearest surface
/// voxel of the other.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDistances {
    pub a_to_b: Vec<f64>,
    pub b_to_a: Vec<f64>,
}

impl SurfaceDistances {
    /// Distances between two non-empty voxel sets.
    pub fn between(a: &[Voxel], b: &[Voxel], spacing: [f64; 3]) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut bbox = BBox::point(a[0]);
        for v in a.iter().chain(b) {
            bbox.extend(*v);
        }
        let dims = bbox.extent();
        let mut mask_a = vec![false; dims[0] * dims[1] * dims[2]];
        let mut mask_b = mask_a.clone();
        let local = |v: &Voxel| {
            (v[0] - bbox.min[0]) + dims[0] * ((v[1] - bbox.min[1]) + dims[1] * (v[2] - bbox.min[2]))
        };
        for v in a {
            mask_a[local(v)] = true;
        }
        for v in b {
            mask_b[local(v)] = true;
        }
        Ok(Self::from_cropped_masks(&mask_a, &mask_b, dims, spacing))
    }

    /// Distances between the foregrounds of two masks on the same grid, or
    /// `None` when either is empty.
    pub fn between_masks(mask_a: &[bool], mask_b: &[bool], dims: [usize; 3], spacing: [f64; 3]) -> Option<Self> {
        let box_a = mask_bbox(mask_a, dims)?;
        let box_b = mask_bbox(mask_b, dims)?;
        let bbox = box_a.union(&box_b);
        let cdims = bbox.extent();
        let crop = |m: &[bool]| {
            let mut out = Vec::with_capacity(cdims[0] * cdims[1] * cdims[2]);
            for z in bbox.min[2]..=bbox.max[2] {
                for y in bbox.min[1]..=bbox.max[1] {
                    let row = dims[0] * (y + dims[1] * z);
                    out.extend_from_slice(&m[row + bbox.min[0]..=row + bbox.max[0]]);
                }
            }
            out
        };
        Some(Self::from_cropped_masks(&crop(mask_a), &crop(mask_b), cdims, spacing))
    }

    fn from_cropped_masks(mask_a: &[bool], mask_b: &[bool], dims: [usize; 3], spacing: [f64; 3]) -> Self {
        let surf_a = surface_mask(mask_a, dims);
        let surf_b = surface_mask(mask_b, dims);
        let sq_to_b = squared_edt(&surf_b, dims, spacing);
        let a_to_b = collect_at(&surf_a, &sq_to_b);
        drop(sq_to_b);
        let sq_to_a = squared_edt(&surf_a, dims, spacing);
        let b_to_a = collect_at(&surf_b, &sq_to_a);
        SurfaceDistances { a_to_b, b_to_a }
    }

    pub fn pooled(&self) -> Vec<f64> {
        let mut all = Vec::with_capacity(self.a_to_b.len() + self.b_to_a.len());
        all.extend_from_slice(&self.a_to_b);
        all.extend_from_slice(&self.b_to_a);
        all
    }

    pub fn hd95(&self, variant: Hd95Variant) -> f64 {
        let p95 = |v: &[f64]| {
            let mut s = v.to_vec();
            s.sort_by(f64::total_cmp);
            percentile_sorted(&s, 0.95).unwrap_or(0.0)
        };
        match variant {
            Hd95Variant::Pooled => p95(&self.pooled()),
            Hd95Variant::MaxOfDirected => p95(&self.a_to_b).max(p95(&self.b_to_a)),
        }
    }

    /// Mean of the pooled multiset.
    pub fn assd(&self) -> f64 {
        let n = self.a_to_b.len() + self.b_to_a.len();
        let total: f64 = self.a_to_b.iter().sum::<f64>() + self.b_to_a.iter().sum::<f64>();
        total / n as f64
    }
}

fn mask_bbox(mask: &[bool], dims: [usize; 3]) -> Option<BBox> {
    let mut bbox: Option<BBox> = None;
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            let row = dims[0] * (y + dims[1] * z);
            let line = &mask[row..row + dims[0]];
            let Some(first) = line.iter().position(|&b| b) else {
                continue;
            };
            let last = line.iter().rposition(|&b| b).unwrap_or(first);
            for v in [[first, y, z], [last, y, z]] {
                match bbox.as_mut() {
                    Some(b) => b.extend(v),
                    None => bbox = Some(BBox::point(v)),
                }
            }
        }
    }
    bbox
}

fn surface_mask(mask: &[bool], dims: [usize; 3]) -> Vec<bool> {
    let [nx, ny, nz] = dims;
    let mut out = vec![false; mask.len()];
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let i = x + nx * (y + ny * z);
                if !mask[i] {
                    continue;
                }
                out[i] = x == 0
                    || x + 1 == nx
                    || y == 0
                    || y + 1 == ny
                    || z == 0
                    || z + 1 == nz
                    || !mask[i - 1]
                    || !mask[i + 1]
                    || !mask[i - nx]
                    || !mask[i + nx]
                    || !mask[i - nx * ny]
                    || !mask[i + nx * ny];
            }
        }
    }
    out
}

fn collect_at(surface: &[bool], sq_dist: &[f64]) -> Vec<f64> {
    surface
        .iter()
        .zip(sq_dist)
        .filter(|(&s, _)| s)
        .map(|(_, &d)| d.sqrt())
        .collect()
}

/// Surface voxels of a non-empty set, in scan order.
pub fn surface_voxels(voxels: &[Voxel]) -> Result<Vec<Voxel>> {
    let first = *voxels.first().ok_or(Error::EmptySet)?;
    let mut bbox = BBox::point(first);
    for v in voxels {
        bbox.extend(*v);
    }
    let dims = bbox.extent();
    let mut mask = vec![false; dims[0] * dims[1] * dims[2]];
    for v in voxels {
        mask[(v[0] - bbox.min[0]) + dims[0] * ((v[1] - bbox.min[1]) + dims[1] * (v[2] - bbox.min[2]))] = true;
    }
    let surf = surface_mask(&mask, dims);
    let mut out: Vec<Voxel> = voxels
        .iter()
        .filter(|v| {
            surf[(v[0] - bbox.min[0]) + dims[0] * ((v[1] - bbox.min[1]) + dims[1] * (v[2] - bbox.min[2]))]
        })
        .copied()
        .collect();
    out.sort_unstable_by_key(|v| scan_key(*v));
    out.dedup();
    Ok(out)
}

/// Squared distance (in spacing units) from every voxel to the nearest
/// `site`; infinite when there are no sites.
fn squared_edt(sites: &[bool], dims: [usize; 3], spacing: [f64; 3]) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    let mut d: Vec<f64> = sites.iter().map(|&s| if s { 0.0 } else { f64::INFINITY }).collect();
    let longest = nx.max(ny).max(nz);
    let mut f = vec![0.0; longest];
    let mut out = vec![0.0; longest];
    let mut v = vec![0usize; longest];
    let mut z = vec![0.0; longest + 1];

    let strides = [1, nx, nx * ny];
    for axis in 0..3 {
        let n = dims[axis];
        if n == 1 {
            continue;
        }
        let w = spacing[axis] * spacing[axis];
        let stride = strides[axis];
        // every line along `axis`
        let (other_a, other_b) = match axis {
            0 => ((ny, nx), (nz, nx * ny)),
            1 => ((nx, 1), (nz, nx * ny)),
            _ => ((nx, 1), (ny, nx)),
        };
        for b in 0..other_b.0 {
            for a in 0..other_a.0 {
                let base = a * other_a.1 + b * other_b.1;
                for q in 0..n {
                    f[q] = d[base + q * stride];
                }
                lower_envelope(&f[..n], w, &mut out[..n], &mut v, &mut z);
                for q in 0..n {
                    d[base + q * stride] = out[q];
                }
            }
        }
    }
    d
}

/// 1D squared distance transform of sampled function `f` with sample
/// spacing `sqrt(w)` (lower envelope of parabolas).
fn lower_envelope(f: &[f64], w: f64, out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let Some(first) = f.iter().position(|x| x.is_finite()) else {
        out.fill(f64::INFINITY);
        return;
    };
    let mut k = 0usize;
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        let fq = f[q] + w * (q * q) as f64;
        loop {
            let p = v[k];
            let s = (fq - (f[p] + w * (p * p) as f64)) / (2.0 * w * (q - p) as f64);
            if s <= z[k] {
                // k > 0 here since z[0] is -inf
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *o = w * dq * dq + f[p];
    }
}
