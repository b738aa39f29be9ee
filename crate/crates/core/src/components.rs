//! 3D connected-component extraction of lesions from a binary mask.
//!
//! Labels are assigned in order of each component's first voxel in the
//! x-fastest scan, i.e. by lexicographic (z, y, x) minimum voxel, so the
//! output does not depend on the labeling strategy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Volume, VoxelData};

/// Voxel index as `[x, y, z]`.
pub type Voxel = [usize; 3];

/// Voxel adjacency used for component extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Connectivity {
    /// Shared face.
    #[default]
    #[serde(rename = "6")]
    Six,
    /// Shared face or edge.
    #[serde(rename = "18")]
    Eighteen,
    /// Shared face, edge or corner.
    #[serde(rename = "26")]
    TwentySix,
}

impl Connectivity {
    pub const ALL: [Connectivity; 3] = [
        Connectivity::Six,
        Connectivity::Eighteen,
        Connectivity::TwentySix,
    ];

    pub fn neighbor_count(self) -> usize {
        match self {
            Connectivity::Six => 6,
            Connectivity::Eighteen => 18,
            Connectivity::TwentySix => 26,
        }
    }

    /// Max L1 norm of a neighbor offset.
    fn max_l1(self) -> i32 {
        match self {
            Connectivity::Six => 1,
            Connectivity::Eighteen => 2,
            Connectivity::TwentySix => 3,
        }
    }

    /// All offsets `[dx, dy, dz]` in the neighborhood.
    pub fn offsets(self) -> Vec<[i32; 3]> {
        let mut out = Vec::with_capacity(self.neighbor_count());
        for dz in -1i32..=1 {
            for dy in -1i32..=1 {
                for dx in -1i32..=1 {
                    let l1 = dx.abs() + dy.abs() + dz.abs();
                    if l1 > 0 && l1 <= self.max_l1() {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.neighbor_count())
    }
}

impl FromStr for Connectivity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "6" => Ok(Connectivity::Six),
            "18" => Ok(Connectivity::Eighteen),
            "26" => Ok(Connectivity::TwentySix),
            other => Err(format!("connectivity must be 6, 18 or 26, got {other:?}")),
        }
    }
}

/// Inclusive axis-aligned voxel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Voxel,
    pub max: Voxel,
}

impl BBox {
    pub fn point(v: Voxel) -> Self {
        BBox { min: v, max: v }
    }

    pub fn extend(&mut self, v: Voxel) {
        for a in 0..3 {
            self.min[a] = self.min[a].min(v[a]);
            self.max[a] = self.max[a].max(v[a]);
        }
    }

    pub fn union(&self, other: &BBox) -> BBox {
        let mut out = *self;
        out.extend(other.min);
        out.extend(other.max);
        out
    }

    pub fn contains(&self, v: Voxel) -> bool {
        (0..3).all(|a| self.min[a] <= v[a] && v[a] <= self.max[a])
    }

    pub fn extent(&self) -> [usize; 3] {
        [
            self.max[0] - self.min[0] + 1,
            self.max[1] - self.min[1] + 1,
            self.max[2] - self.min[2] + 1,
        ]
    }

    /// Bounds are inclusive voxel indices, so touching boxes overlap.
    pub fn overlaps(&self, other: &BBox) -> bool {
        (0..3).all(|a| self.min[a] <= other.max[a] && other.min[a] <= self.max[a])
    }
}

/// One connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct Lesion {
    pub id: u32,
    /// Sorted by (z, y, x), i.e. by linear index.
    pub voxels: Vec<Voxel>,
    pub bbox: BBox,
    pub volume_mm3: f64,
    /// Mean voxel index.
    pub centroid: [f64; 3],
}

impl Lesion {
    /// Assemble a lesion from a voxel list, sorting it into scan order.
    pub fn from_voxels(id: u32, mut voxels: Vec<Voxel>, spacing: [f64; 3]) -> Result<Self> {
        let first = *voxels.first().ok_or(Error::EmptySet)?;
        voxels.sort_unstable_by_key(|v| scan_key(*v));
        voxels.dedup();
        let mut bbox = BBox::point(first);
        let mut sum = [0f64; 3];
        for v in &voxels {
            bbox.extend(*v);
            for a in 0..3 {
                sum[a] += v[a] as f64;
            }
        }
        let n = voxels.len() as f64;
        Ok(Lesion {
            id,
            volume_mm3: n * spacing[0] * spacing[1] * spacing[2],
            centroid: [sum[0] / n, sum[1] / n, sum[2] / n],
            bbox,
            voxels,
        })
    }

    pub fn volume_vox(&self) -> usize {
        self.voxels.len()
    }
}

/// Ordering key matching the x-fastest linear index.
#[inline]
pub fn scan_key(v: Voxel) -> (usize, usize, usize) {
    (v[2], v[1], v[0])
}

/// All lesions of one mask plus the label map they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LesionSet {
    pub lesions: Vec<Lesion>,
    /// 0 = background, k = lesion id k. x-fastest.
    pub label_map: Vec<u32>,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
}

impl LesionSet {
    pub fn len(&self) -> usize {
        self.lesions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lesions.is_empty()
    }

    /// Lesion by id (ids are 1..=len).
    pub fn get(&self, id: u32) -> Option<&Lesion> {
        id.checked_sub(1)
            .and_then(|i| self.lesions.get(i as usize))
    }

    pub fn foreground_count(&self) -> usize {
        self.lesions.iter().map(Lesion::volume_vox).sum()
    }

    /// Label map as a u16 volume, for visual inspection.
    pub fn label_volume(&self) -> Result<Volume> {
        if self.lesions.len() > u16::MAX as usize {
            return Err(Error::InvalidVolume(format!(
                "{} labels do not fit in u16",
                self.lesions.len()
            )));
        }
        let data = self.label_map.iter().map(|&l| l as u16).collect();
        Volume::new(self.dims, self.spacing, VoxelData::U16(data))
    }
}

/// One row of [`lesion_stats`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LesionStat {
    pub id: u32,
    pub volume_vox: usize,
    pub volume_mm3: f64,
    pub bbox: BBox,
    pub centroid: [f64; 3],
}

pub fn lesion_stats(set: &LesionSet) -> Vec<LesionStat> {
    set.lesions
        .iter()
        .map(|l| LesionStat {
            id: l.id,
            volume_vox: l.volume_vox(),
            volume_mm3: l.volume_mm3,
            bbox: l.bbox,
            centroid: l.centroid,
        })
        .collect()
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // slot 0 is the background sentinel
        DisjointSet { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Partition the foreground of a binary mask into maximal connected
/// components.
pub fn find_connected_components(mask: &Volume, connectivity: Connectivity) -> Result<LesionSet> {
    if let Some(bad) = mask.first_non_binary() {
        return Err(Error::NotBinary(bad));
    }
    let fg = mask.foreground();
    Ok(label_foreground(&fg, mask.dims(), mask.spacing(), connectivity))
}

/// Two-pass union-find labeling over a boolean grid.
pub(crate) fn label_foreground(
    fg: &[bool],
    dims: [usize; 3],
    spacing: [f64; 3],
    connectivity: Connectivity,
) -> LesionSet {
    let [nx, ny, nz] = dims;
    let sx = 1isize;
    let sy = nx as isize;
    let sz = (nx * ny) as isize;

    // Neighbors already visited in scan order.
    let backward: Vec<[i32; 3]> = connectivity
        .offsets()
        .into_iter()
        .filter(|&[dx, dy, dz]| dz < 0 || (dz == 0 && (dy < 0 || (dy == 0 && dx < 0))))
        .collect();

    let mut labels = vec![0u32; fg.len()];
    let mut sets = DisjointSet::new();

    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let i = x + nx * (y + ny * z);
                if !fg[i] {
                    continue;
                }
                let mut current = 0u32;
                for &[dx, dy, dz] in &backward {
                    let (xx, yy, zz) = (x as isize + dx as isize, y as isize + dy as isize, z as isize + dz as isize);
                    if xx < 0 || yy < 0 || zz < 0 || xx >= nx as isize || yy >= ny as isize {
                        continue;
                    }
                    let j = (i as isize + dx as isize * sx + dy as isize * sy + dz as isize * sz) as usize;
                    let l = labels[j];
                    if l == 0 {
                        continue;
                    }
                    if current == 0 {
                        current = l;
                    } else if current != l {
                        sets.union(current, l);
                    }
                }
                labels[i] = if current == 0 { sets.make() } else { current };
            }
        }
    }

    // Final ids by first appearance of each root in scan order.
    let mut final_id = vec![0u32; sets.parent.len()];
    let mut next = 0u32;
    let mut lesions: Vec<Lesion> = Vec::new();
    let mut sums: Vec<[f64; 3]> = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let i = x + nx * (y + ny * z);
                if labels[i] == 0 {
                    continue;
                }
                let root = sets.find(labels[i]) as usize;
                if final_id[root] == 0 {
                    next += 1;
                    final_id[root] = next;
                    lesions.push(Lesion {
                        id: next,
                        voxels: Vec::new(),
                        bbox: BBox::point([x, y, z]),
                        volume_mm3: 0.0,
                        centroid: [0.0; 3],
                    });
                    sums.push([0.0; 3]);
                }
                let id = final_id[root];
                labels[i] = id;
                let k = (id - 1) as usize;
                let lesion = &mut lesions[k];
                lesion.voxels.push([x, y, z]);
                lesion.bbox.extend([x, y, z]);
                sums[k][0] += x as f64;
                sums[k][1] += y as f64;
                sums[k][2] += z as f64;
            }
        }
    }

    let voxel_mm3 = spacing[0] * spacing[1] * spacing[2];
    for (lesion, sum) in lesions.iter_mut().zip(&sums) {
        let n = lesion.voxels.len() as f64;
        lesion.volume_mm3 = n * voxel_mm3;
        lesion.centroid = [sum[0] / n, sum[1] / n, sum[2] / n];
    }

    LesionSet {
        lesions,
        label_map: labels,
        dims,
        spacing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_with(dims: [usize; 3], voxels: &[Voxel]) -> Volume {
        let mut data = vec![0u8; dims.iter().product()];
        for v in voxels {
            data[v[0] + dims[0] * (v[1] + dims[1] * v[2])] = 1;
        }
        Volume::from_mask(dims, [1.0; 3], data).unwrap()
    }

    #[test]
    fn offsets_sizes() {
        for c in Connectivity::ALL {
            assert_eq!(c.offsets().len(), c.neighbor_count());
        }
    }

    #[test]
    fn empty_mask_has_no_lesions() {
        let v = Volume::zeros([4, 4, 4], [1.0; 3]).unwrap();
        let set = find_connected_components(&v, Connectivity::Six).unwrap();
        assert!(set.is_empty());
        assert!(lesion_stats(&set).is_empty());
    }

    #[test]
    fn diagonal_pair_depends_on_connectivity() {
        let v = mask_with([2, 2, 1], &[[0, 0, 0], [1, 1, 0]]);
        assert_eq!(find_connected_components(&v, Connectivity::Six).unwrap().len(), 2);
        assert_eq!(find_connected_components(&v, Connectivity::Eighteen).unwrap().len(), 1);
        assert_eq!(find_connected_components(&v, Connectivity::TwentySix).unwrap().len(), 1);
    }

    #[test]
    fn corner_neighbors_only_join_under_26() {
        let v = mask_with([2, 2, 2], &[[0, 0, 0], [1, 1, 1]]);
        assert_eq!(find_connected_components(&v, Connectivity::Eighteen).unwrap().len(), 2);
        assert_eq!(find_connected_components(&v, Connectivity::TwentySix).unwrap().len(), 1);
    }

    #[test]
    fn centered_cube() {
        let mut vox = Vec::new();
        for z in 1..4 {
            for y in 1..4 {
                for x in 1..4 {
                    vox.push([x, y, z]);
                }
            }
        }
        let set = find_connected_components(&mask_with([5, 5, 5], &vox), Connectivity::Six).unwrap();
        assert_eq!(set.len(), 1);
        let l = &set.lesions[0];
        assert_eq!(l.volume_vox(), 27);
        assert_eq!(l.bbox, BBox { min: [1, 1, 1], max: [3, 3, 3] });
        assert_eq!(l.centroid, [2.0, 2.0, 2.0]);
    }

    #[test]
    fn u_shape_merges_provisional_labels() {
        // Two arms joined only at the bottom row: needs a union during the scan.
        let v = mask_with(
            [3, 3, 1],
            &[[0, 0, 0], [2, 0, 0], [0, 1, 0], [2, 1, 0], [0, 2, 0], [1, 2, 0], [2, 2, 0]],
        );
        let set = find_connected_components(&v, Connectivity::Six).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.lesions[0].volume_vox(), 7);
    }

    #[test]
    fn ids_follow_scan_order_of_min_voxel() {
        // Lesion whose min voxel is at z=0 gets id 1 even though another
        // lesion reaches lower x.
        let v = mask_with([4, 1, 3], &[[3, 0, 0], [0, 0, 2], [1, 0, 2]]);
        let set = find_connected_components(&v, Connectivity::Six).unwrap();
        assert_eq!(set.lesions[0].voxels, vec![[3, 0, 0]]);
        assert_eq!(set.lesions[1].voxels, vec![[0, 0, 2], [1, 0, 2]]);
        assert_eq!(set.label_map[3], 1);
        assert_eq!(set.label_map[8], 2);
    }

    #[test]
    fn stats_single_voxel() {
        let v = mask_with([5, 5, 5], &[[2, 3, 4]]);
        let set = find_connected_components(&v, Connectivity::Six).unwrap();
        let stats = lesion_stats(&set);
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].volume_mm3, 1.0);
        assert_eq!(stats[0].centroid, [2.0, 3.0, 4.0]);
    }

    #[test]
    fn stats_anisotropic_volume() {
        let mut vox = Vec::new();
        for z in 0..2 {
            for y in 0..2 {
                for x in 0..2 {
                    vox.push([x, y, z]);
                }
            }
        }
        let mut data = vec![0u8; 27];
        for v in &vox {
            data[v[0] + 3 * (v[1] + 3 * v[2])] = 1;
        }
        let vol = Volume::from_mask([3, 3, 3], [0.5, 0.5, 2.0], data).unwrap();
        let set = find_connected_components(&vol, Connectivity::Six).unwrap();
        assert_eq!(lesion_stats(&set)[0].volume_mm3, 4.0);
    }

    #[test]
    fn non_binary_rejected() {
        let v = Volume::new([2, 1, 1], [1.0; 3], VoxelData::F32(vec![0.0, 0.5])).unwrap();
        assert!(matches!(
            find_connected_components(&v, Connectivity::Six),
            Err(Error::NotBinary(_))
        ));
    }

    #[test]
    fn label_volume_dump() {
        let v = mask_with([3, 1, 1], &[[0, 0, 0], [2, 0, 0]]);
        let set = find_connected_components(&v, Connectivity::Six).unwrap();
        let lv = set.label_volume().unwrap();
        assert_eq!(lv.data(), &VoxelData::U16(vec![1, 0, 2]));
    }

    #[test]
    fn bbox_overlap_inclusive() {
        let a = BBox { min: [0, 0, 0], max: [1, 1, 1] };
        assert!(a.overlaps(&a));
        assert!(!a.overlaps(&BBox { min: [3, 0, 0], max: [4, 1, 1] }));
        assert!(a.overlaps(&BBox { min: [1, 0, 0], max: [2, 1, 1] }));
    }

    #[test]
    fn connectivity_parse() {
        assert_eq!("26".parse::<Connectivity>().unwrap(), Connectivity::TwentySix);
        assert!("8".parse::<Connectivity>().is_err());
    }
}
