//! In-memory mask volumes and their on-disk encodings.
//!
//! Two encodings are supported: NIfTI-1 (`.nii`, `.nii.gz`, `.hdr`/`.img`)
//! and a small JSON fixture (`.json`) of the form
//! `{"dims":[x,y,z],"spacing":[sx,sy,sz],"data":[0,1,...]}`.
//! Voxel data is always stored x-fastest.

mod fixture;
pub mod nifti;

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub use nifti::{read_header, VolumeHeaderSummary};

/// Relative per-axis tolerance used by [`check_compatibility`].
pub const SPACING_REL_TOL: f64 = 1e-4;

/// Decoded voxel payload, keeping the on-disk element type so that
/// `read(write(v))` is bit-exact.
#[derive(Debug, Clone, PartialEq)]
pub enum VoxelData {
    U8(Vec<u8>),
    I16(Vec<i16>),
    U16(Vec<u16>),
    I32(Vec<i32>),
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl VoxelData {
    pub fn len(&self) -> usize {
        match self {
            VoxelData::U8(v) => v.len(),
            VoxelData::I16(v) => v.len(),
            VoxelData::U16(v) => v.len(),
            VoxelData::I32(v) => v.len(),
            VoxelData::F32(v) => v.len(),
            VoxelData::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value at linear index `i`, widened to `f64`.
    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        match self {
            VoxelData::U8(v) => v[i] as f64,
            VoxelData::I16(v) => v[i] as f64,
            VoxelData::U16(v) => v[i] as f64,
            VoxelData::I32(v) => v[i] as f64,
            VoxelData::F32(v) => v[i] as f64,
            VoxelData::F64(v) => v[i],
        }
    }

    /// NIfTI-1 datatype code for this element type.
    pub fn datatype_code(&self) -> i16 {
        match self {
            VoxelData::U8(_) => nifti::DT_UINT8,
            VoxelData::I16(_) => nifti::DT_INT16,
            VoxelData::U16(_) => nifti::DT_UINT16,
            VoxelData::I32(_) => nifti::DT_INT32,
            VoxelData::F32(_) => nifti::DT_FLOAT32,
            VoxelData::F64(_) => nifti::DT_FLOAT64,
        }
    }

    fn to_f64(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}

/// A 3D voxel grid with physical spacing.
#[derive(Debug, Clone)]
pub struct Volume {
    dims: [usize; 3],
    spacing: [f64; 3],
    data: VoxelData,
    /// Where the volume was read from, if anywhere.
    pub source_path: Option<PathBuf>,
    /// Set when a zero pixdim entry was replaced by 1.0 on read.
    pub spacing_repaired: bool,
}

impl PartialEq for Volume {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.spacing == other.spacing && self.data == other.data
    }
}

impl Volume {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], data: VoxelData) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidVolume(format!("zero extent in dims {dims:?}")));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidVolume(format!(
                "spacing must be positive, got {spacing:?}"
            )));
        }
        let expected = dims[0] * dims[1] * dims[2];
        if data.len() != expected {
            return Err(Error::InvalidVolume(format!(
                "data length {} does not match dims {dims:?}",
                data.len()
            )));
        }
        Ok(Volume {
            dims,
            spacing,
            data,
            source_path: None,
            spacing_repaired: false,
        })
    }

    /// Binary u8 volume from a 0/1 buffer.
    pub fn from_mask(dims: [usize; 3], spacing: [f64; 3], mask: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = mask.iter().find(|&&v| v > 1) {
            return Err(Error::NotBinary(bad as f64));
        }
        Volume::new(dims, spacing, VoxelData::U8(mask))
    }

    /// All-zero u8 volume.
    pub fn zeros(dims: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        let n = dims.iter().product();
        Volume::new(dims, spacing, VoxelData::U8(vec![0; n]))
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn data(&self) -> &VoxelData {
        &self.data
    }

    pub fn into_data(self) -> VoxelData {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data.get(self.index(x, y, z))
    }

    /// True iff every voxel is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.first_non_binary().is_none()
    }

    pub(crate) fn first_non_binary(&self) -> Option<f64> {
        match &self.data {
            VoxelData::U8(v) => v.iter().find(|&&x| x > 1).map(|&x| x as f64),
            _ => (0..self.len())
                .map(|i| self.data.get(i))
                .find(|&x| x != 0.0 && x != 1.0),
        }
    }

    /// Count of non-zero voxels.
    pub fn foreground_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.data.get(i) != 0.0).count()
    }

    /// Foreground as a boolean buffer (any non-zero value).
    pub fn foreground(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.data.get(i) != 0.0).collect()
    }
}

/// Threshold a volume: 1 where value > `threshold`, else 0. The result is a
/// u8 binary volume with the same geometry.
pub fn binarize(v: &Volume, threshold: f64) -> Volume {
    let mask: Vec<u8> = (0..v.len())
        .map(|i| u8::from(v.data.get(i) > threshold))
        .collect();
    Volume {
        dims: v.dims,
        spacing: v.spacing,
        data: VoxelData::U8(mask),
        source_path: v.source_path.clone(),
        spacing_repaired: v.spacing_repaired,
    }
}

/// Ground truth and prediction must share a grid: equal dims and spacing
/// equal within [`SPACING_REL_TOL`] per axis.
pub fn check_compatibility(gt: &Volume, pred: &Volume) -> Result<()> {
    if gt.dims != pred.dims {
        return Err(Error::DimsMismatch {
            gt: gt.dims,
            pred: pred.dims,
        });
    }
    for axis in 0..3 {
        let (a, b) = (gt.spacing[axis], pred.spacing[axis]);
        if (a - b).abs() > SPACING_REL_TOL * a.abs().max(b.abs()) {
            return Err(Error::SpacingMismatch {
                axis,
                gt: a,
                pred: b,
            });
        }
    }
    Ok(())
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"))
}

/// Read a NIfTI-1 file (plain or gzip, detected by content) or a JSON
/// fixture (detected by the `.json` suffix).
pub fn read_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    let mut vol = if is_json(path) {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        fixture::from_json(&text)?
    } else {
        nifti::read_nifti(path)?
    };
    vol.source_path = Some(path.to_path_buf());
    Ok(vol)
}

/// Write `v` as a JSON fixture (`.json`), gzip NIfTI-1 (`.gz`) or plain
/// single-file NIfTI-1 (anything else). The element type is kept as is, so
/// masks produced by [`binarize`] are stored as u8.
pub fn write_volume(v: &Volume, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = if is_json(path) {
        fixture::to_json(v)?.into_bytes()
    } else {
        let raw = nifti::encode(v);
        if is_gz(path) {
            nifti::gzip(&raw).map_err(|e| Error::io(path, e))?
        } else {
            raw
        }
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
