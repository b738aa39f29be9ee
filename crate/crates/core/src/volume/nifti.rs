//! NIfTI-1 header parsing and single-file encoding.
//!
//! Endianness is detected from `sizeof_hdr` (348 in the file's byte order).
//! The qform/sform affine is parsed but never applied; evaluation happens in
//! voxel index space.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{BigEndian, ByteOrder, LittleEndian};
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::{Volume, VoxelData};
use crate::error::{Error, Result};

pub const HEADER_SIZE: usize = 348;
/// Header plus the 4-byte extension flag.
pub const SINGLE_FILE_VOX_OFFSET: usize = 352;

pub const DT_UINT8: i16 = 2;
pub const DT_INT16: i16 = 4;
pub const DT_INT32: i16 = 8;
pub const DT_FLOAT32: i16 = 16;
pub const DT_FLOAT64: i16 = 64;
pub const DT_UINT16: i16 = 512;

pub const MAGIC_SINGLE: [u8; 4] = *b"n+1\0";
pub const MAGIC_PAIR: [u8; 4] = *b"ni1\0";

mod offset {
    pub const SIZEOF_HDR: usize = 0;
    pub const DIM: usize = 40;
    pub const DATATYPE: usize = 70;
    pub const BITPIX: usize = 72;
    pub const PIXDIM: usize = 76;
    pub const VOX_OFFSET: usize = 108;
    pub const SCL_SLOPE: usize = 112;
    pub const SCL_INTER: usize = 116;
    pub const XYZT_UNITS: usize = 123;
    pub const QFORM_CODE: usize = 252;
    pub const SFORM_CODE: usize = 254;
    pub const SROW_X: usize = 280;
    pub const MAGIC: usize = 344;
}

/// The header fields the reader cares about.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeHeaderSummary {
    pub datatype_code: i16,
    pub dim: [i16; 8],
    pub pixdim: [f32; 8],
    pub magic: [u8; 4],
    pub vox_offset: f32,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub qform_code: i16,
    pub sform_code: i16,
    /// Rows of the sform affine (parsed only).
    pub srow: [[f32; 4]; 3],
    pub big_endian: bool,
}

impl VolumeHeaderSummary {
    fn parse_with<E: ByteOrder>(b: &[u8], big_endian: bool) -> Self {
        let mut dim = [0i16; 8];
        E::read_i16_into(&b[offset::DIM..offset::DIM + 16], &mut dim);
        let mut pixdim = [0f32; 8];
        E::read_f32_into(&b[offset::PIXDIM..offset::PIXDIM + 32], &mut pixdim);
        let mut srow = [[0f32; 4]; 3];
        for (r, row) in srow.iter_mut().enumerate() {
            let at = offset::SROW_X + 16 * r;
            E::read_f32_into(&b[at..at + 16], row);
        }
        let mut magic = [0u8; 4];
        magic.copy_from_slice(&b[offset::MAGIC..offset::MAGIC + 4]);
        VolumeHeaderSummary {
            datatype_code: E::read_i16(&b[offset::DATATYPE..]),
            dim,
            pixdim,
            magic,
            vox_offset: E::read_f32(&b[offset::VOX_OFFSET..]),
            scl_slope: E::read_f32(&b[offset::SCL_SLOPE..]),
            scl_inter: E::read_f32(&b[offset::SCL_INTER..]),
            qform_code: E::read_i16(&b[offset::QFORM_CODE..]),
            sform_code: E::read_i16(&b[offset::SFORM_CODE..]),
            srow,
            big_endian,
        }
    }

    /// Parse and validate the first 348 bytes of `bytes`.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_SIZE {
            return Err(Error::TruncatedFile {
                expected: HEADER_SIZE,
                actual: bytes.len(),
            });
        }
        let hdr = if LittleEndian::read_i32(bytes) == HEADER_SIZE as i32 {
            Self::parse_with::<LittleEndian>(bytes, false)
        } else if BigEndian::read_i32(bytes) == HEADER_SIZE as i32 {
            Self::parse_with::<BigEndian>(bytes, true)
        } else {
            let mut magic = [0u8; 4];
            magic.copy_from_slice(&bytes[offset::MAGIC..offset::MAGIC + 4]);
            return Err(Error::BadMagic(magic));
        };
        if hdr.magic != MAGIC_SINGLE && hdr.magic != MAGIC_PAIR {
            return Err(Error::BadMagic(hdr.magic));
        }
        match hdr.dim[0] {
            3 => {}
            4 if hdr.dim[4] == 1 => {}
            _ => return Err(Error::Not3D(hdr.dim)),
        }
        if hdr.dim[1..4].iter().any(|&d| d < 1) {
            return Err(Error::InvalidVolume(format!(
                "non-positive extent in dim {:?}",
                hdr.dim
            )));
        }
        Ok(hdr)
    }

    pub fn dims(&self) -> [usize; 3] {
        [
            self.dim[1] as usize,
            self.dim[2] as usize,
            self.dim[3] as usize,
        ]
    }

    /// Absolute pixdim[1..=3]; zero entries become 1.0 and set the flag.
    pub fn spacing(&self) -> ([f64; 3], bool) {
        let mut repaired = false;
        let mut out = [1.0; 3];
        for (i, s) in out.iter_mut().enumerate() {
            let p = (self.pixdim[i + 1] as f64).abs();
            if p == 0.0 || !p.is_finite() {
                repaired = true;
            } else {
                *s = p;
            }
        }
        (out, repaired)
    }

    fn bytes_per_voxel(&self) -> Result<usize> {
        Ok(match self.datatype_code {
            DT_UINT8 => 1,
            DT_INT16 | DT_UINT16 => 2,
            DT_INT32 | DT_FLOAT32 => 4,
            DT_FLOAT64 => 8,
            other => return Err(Error::UnsupportedDatatype(other)),
        })
    }
}

fn decode<E: ByteOrder>(code: i16, raw: &[u8], n: usize) -> VoxelData {
    match code {
        DT_UINT8 => VoxelData::U8(raw[..n].to_vec()),
        DT_INT16 => {
            let mut v = vec![0; n];
            E::read_i16_into(&raw[..2 * n], &mut v);
            VoxelData::I16(v)
        }
        DT_UINT16 => {
            let mut v = vec![0; n];
            E::read_u16_into(&raw[..2 * n], &mut v);
            VoxelData::U16(v)
        }
        DT_INT32 => {
            let mut v = vec![0; n];
            E::read_i32_into(&raw[..4 * n], &mut v);
            VoxelData::I32(v)
        }
        DT_FLOAT32 => {
            let mut v = vec![0.0; n];
            E::read_f32_into(&raw[..4 * n], &mut v);
            VoxelData::F32(v)
        }
        DT_FLOAT64 => {
            let mut v = vec![0.0; n];
            E::read_f64_into(&raw[..8 * n], &mut v);
            VoxelData::F64(v)
        }
        _ => unreachable!("datatype validated before decoding"),
    }
}

pub(crate) fn is_gzip(bytes: &[u8]) -> bool {
    bytes.len() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b
}

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if is_gzip(&bytes) {
        let mut out = Vec::new();
        GzDecoder::new(&bytes[..])
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(bytes)
    }
}

pub(crate) fn gzip(raw: &[u8]) -> std::io::Result<Vec<u8>> {
    let mut enc = GzEncoder::new(Vec::new(), Compression::default());
    enc.write_all(raw)?;
    enc.finish()
}

/// `foo.hdr` -> `foo.img`, `foo.hdr.gz` -> `foo.img.gz` (falling back to the
/// uncompressed name when only that exists).
fn image_path_for(header_path: &Path) -> PathBuf {
    let name = header_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let swapped = if let Some(stem) = name.strip_suffix(".hdr.gz") {
        format!("{stem}.img.gz")
    } else if let Some(stem) = name.strip_suffix(".hdr") {
        format!("{stem}.img")
    } else {
        format!("{name}.img")
    };
    let candidate = header_path.with_file_name(&swapped);
    if !candidate.exists() {
        if let Some(plain) = swapped.strip_suffix(".gz") {
            return header_path.with_file_name(plain);
        }
    }
    candidate
}

/// Read only the header of a NIfTI-1 file.
pub fn read_header(path: impl AsRef<Path>) -> Result<VolumeHeaderSummary> {
    let bytes = read_maybe_gz(path.as_ref())?;
    VolumeHeaderSummary::parse(&bytes)
}

pub(super) fn read_nifti(path: &Path) -> Result<Volume> {
    let bytes = read_maybe_gz(path)?;
    let hdr = VolumeHeaderSummary::parse(&bytes)?;
    let bpv = hdr.bytes_per_voxel()?;
    let dims = hdr.dims();
    let n = dims[0] * dims[1] * dims[2];

    let image_bytes;
    let (buf, start) = if hdr.magic == MAGIC_SINGLE {
        (&bytes[..], hdr.vox_offset.max(0.0) as usize)
    } else {
        image_bytes = read_maybe_gz(&image_path_for(path))?;
        (&image_bytes[..], hdr.vox_offset.max(0.0) as usize)
    };
    let expected = start + n * bpv;
    if buf.len() < expected {
        return Err(Error::TruncatedFile {
            expected,
            actual: buf.len(),
        });
    }
    let raw = &buf[start..expected];
    let mut data = if hdr.big_endian {
        decode::<BigEndian>(hdr.datatype_code, raw, n)
    } else {
        decode::<LittleEndian>(hdr.datatype_code, raw, n)
    };

    let slope = hdr.scl_slope as f64;
    let inter = hdr.scl_inter as f64;
    if slope != 0.0 && slope.is_finite() && !(slope == 1.0 && inter == 0.0) {
        data = VoxelData::F64(
            (0..n)
                .map(|i| data.get(i) * slope + inter)
                .collect(),
        );
    }

    let (spacing, repaired) = hdr.spacing();
    let mut vol = Volume::new(dims, spacing, data)?;
    vol.spacing_repaired = repaired;
    Ok(vol)
}

/// Encode as little-endian single-file NIfTI-1: 348-byte header, 4 zero
/// extension bytes, then voxel data at offset 352.
///
/// pixdim is single precision on disk, so spacing round-trips exactly only
/// when it is representable as `f32`.
pub fn encode(v: &Volume) -> Vec<u8> {
    type E = LittleEndian;
    let data = v.data();
    let code = data.datatype_code();
    let bpv = match data {
        VoxelData::U8(_) => 1,
        VoxelData::I16(_) | VoxelData::U16(_) => 2,
        VoxelData::I32(_) | VoxelData::F32(_) => 4,
        VoxelData::F64(_) => 8,
    };
    let dims = v.dims();
    let spacing = v.spacing();
    let mut out = vec![0u8; SINGLE_FILE_VOX_OFFSET + data.len() * bpv];
    let h = &mut out[..HEADER_SIZE];

    E::write_i32(&mut h[offset::SIZEOF_HDR..], HEADER_SIZE as i32);
    let dim: [i16; 8] = [3, dims[0] as i16, dims[1] as i16, dims[2] as i16, 1, 1, 1, 1];
    E::write_i16_into(&dim, &mut h[offset::DIM..offset::DIM + 16]);
    E::write_i16(&mut h[offset::DATATYPE..], code);
    E::write_i16(&mut h[offset::BITPIX..], (bpv * 8) as i16);
    let pixdim: [f32; 8] = [
        1.0,
        spacing[0] as f32,
        spacing[1] as f32,
        spacing[2] as f32,
        0.0,
        0.0,
        0.0,
        0.0,
    ];
    E::write_f32_into(&pixdim, &mut h[offset::PIXDIM..offset::PIXDIM + 32]);
    E::write_f32(&mut h[offset::VOX_OFFSET..], SINGLE_FILE_VOX_OFFSET as f32);
    E::write_f32(&mut h[offset::SCL_SLOPE..], 1.0);
    E::write_f32(&mut h[offset::SCL_INTER..], 0.0);
    h[offset::XYZT_UNITS] = 2; // mm
    E::write_i16(&mut h[offset::SFORM_CODE..], 1);
    for r in 0..3 {
        let mut row = [0f32; 4];
        row[r] = spacing[r] as f32;
        let at = offset::SROW_X + 16 * r;
        E::write_f32_into(&row, &mut h[at..at + 16]);
    }
    h[offset::MAGIC..offset::MAGIC + 4].copy_from_slice(&MAGIC_SINGLE);

    let body = &mut out[SINGLE_FILE_VOX_OFFSET..];
    match data {
        VoxelData::U8(d) => body.copy_from_slice(d),
        VoxelData::I16(d) => E::write_i16_into(d, body),
        VoxelData::U16(d) => E::write_u16_into(d, body),
        VoxelData::I32(d) => E::write_i32_into(d, body),
        VoxelData::F32(d) => E::write_f32_into(d, body),
        VoxelData::F64(d) => E::write_f64_into(d, body),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::{read_volume, write_volume};

    fn cube(n: usize) -> Volume {
        Volume::zeros([n, n, n], [1.0; 3]).unwrap()
    }

    /// Re-encode a little-endian header and payload as big-endian.
    fn to_big_endian(le: &[u8], elem: usize) -> Vec<u8> {
        let mut be = le.to_vec();
        let swap = |b: &mut [u8], at: usize, w: usize| b[at..at + w].reverse();
        swap(&mut be, 0, 4);
        for i in 0..8 {
            swap(&mut be, offset::DIM + 2 * i, 2);
            swap(&mut be, offset::PIXDIM + 4 * i, 4);
        }
        for at in [offset::DATATYPE, offset::BITPIX, offset::QFORM_CODE, offset::SFORM_CODE] {
            swap(&mut be, at, 2);
        }
        for at in [offset::VOX_OFFSET, offset::SCL_SLOPE, offset::SCL_INTER] {
            swap(&mut be, at, 4);
        }
        for i in 0..12 {
            swap(&mut be, offset::SROW_X + 4 * i, 4);
        }
        let mut at = SINGLE_FILE_VOX_OFFSET;
        while at < be.len() {
            swap(&mut be, at, elem);
            at += elem;
        }
        be
    }

    #[test]
    fn binary_2x2x2_is_360_bytes() {
        let v = Volume::from_mask([2, 2, 2], [1.0; 3], vec![0, 1, 0, 1, 1, 0, 0, 0]).unwrap();
        let bytes = encode(&v);
        assert_eq!(bytes.len(), 352 + 8);
        // independent header dump
        assert_eq!(i32::from_le_bytes(bytes[0..4].try_into().unwrap()), 348);
        assert_eq!(&bytes[344..348], b"n+1\0");
        assert_eq!(i16::from_le_bytes([bytes[70], bytes[71]]), 2);
        assert_eq!(f32::from_le_bytes(bytes[108..112].try_into().unwrap()), 352.0);
        assert_eq!(&bytes[352..], &[0, 1, 0, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn roundtrip_plain_and_gz() {
        let dir = tempfile::tempdir().unwrap();
        let v = cube(4);
        let plain = dir.path().join("a.nii");
        let gz = dir.path().join("a.nii.gz");
        write_volume(&v, &plain).unwrap();
        write_volume(&v, &gz).unwrap();
        let raw = fs::read(&gz).unwrap();
        assert!(is_gzip(&raw));
        assert_eq!(read_volume(&plain).unwrap(), v);
        assert_eq!(read_volume(&gz).unwrap(), v);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode(&cube(2));
        bytes[344..348].copy_from_slice(b"ABCD");
        assert!(matches!(
            VolumeHeaderSummary::parse(&bytes),
            Err(Error::BadMagic(m)) if &m == b"ABCD"
        ));
        // not even a plausible sizeof_hdr
        let junk = vec![7u8; 400];
        assert!(matches!(VolumeHeaderSummary::parse(&junk), Err(Error::BadMagic(_))));
    }

    #[test]
    fn unsupported_datatype() {
        let dir = tempfile::tempdir().unwrap();
        let mut bytes = encode(&cube(2));
        bytes[70..72].copy_from_slice(&32i16.to_le_bytes()); // complex64
        let p = dir.path().join("c.nii");
        fs::write(&p, bytes).unwrap();
        assert!(matches!(read_volume(&p), Err(Error::UnsupportedDatatype(32))));
    }

    #[test]
    fn truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let bytes = encode(&cube(4));
        let p = dir.path().join("t.nii");
        fs::write(&p, &bytes[..bytes.len() - 10]).unwrap();
        assert!(matches!(
            read_volume(&p),
            Err(Error::TruncatedFile { expected: 416, actual: 406 })
        ));
        let short = dir.path().join("s.nii");
        fs::write(&short, &bytes[..100]).unwrap();
        assert!(matches!(read_volume(&short), Err(Error::TruncatedFile { .. })));
    }

    #[test]
    fn four_d_handling() {
        let mut bytes = encode(&cube(2));
        bytes[40..42].copy_from_slice(&4i16.to_le_bytes());
        // singleton 4th axis squeezed
        assert!(VolumeHeaderSummary::parse(&bytes).is_ok());
        bytes[48..50].copy_from_slice(&2i16.to_le_bytes());
        assert!(matches!(VolumeHeaderSummary::parse(&bytes), Err(Error::Not3D(_))));
        bytes[40..42].copy_from_slice(&2i16.to_le_bytes());
        assert!(matches!(VolumeHeaderSummary::parse(&bytes), Err(Error::Not3D(_))));
    }

    #[test]
    fn zero_pixdim_replaced_and_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let mut bytes = encode(&Volume::zeros([2, 2, 2], [2.0, 1.0, 1.0]).unwrap());
        bytes[84..88].copy_from_slice(&0f32.to_le_bytes()); // pixdim[2]
        bytes[80..84].copy_from_slice(&(-2f32).to_le_bytes()); // pixdim[1], negative
        let p = dir.path().join("z.nii");
        fs::write(&p, bytes).unwrap();
        let v = read_volume(&p).unwrap();
        assert_eq!(v.spacing(), [2.0, 1.0, 1.0]);
        assert!(v.spacing_repaired);
    }

    #[test]
    fn scaling_applied() {
        let dir = tempfile::tempdir().unwrap();
        let v = Volume::new([2, 1, 1], [1.0; 3], VoxelData::I16(vec![1, 3])).unwrap();
        let mut bytes = encode(&v);
        bytes[112..116].copy_from_slice(&0.5f32.to_le_bytes());
        bytes[116..120].copy_from_slice(&1.0f32.to_le_bytes());
        let p = dir.path().join("s.nii");
        fs::write(&p, bytes).unwrap();
        let r = read_volume(&p).unwrap();
        assert_eq!(r.data(), &VoxelData::F64(vec![1.5, 2.5]));

        // slope 0 means "no scaling"
        let mut bytes = encode(&v);
        bytes[112..116].copy_from_slice(&0f32.to_le_bytes());
        fs::write(&p, bytes).unwrap();
        assert_eq!(read_volume(&p).unwrap().data(), v.data());
    }

    #[test]
    fn big_endian_file() {
        let dir = tempfile::tempdir().unwrap();
        let v = Volume::new(
            [3, 1, 1],
            [0.5, 1.0, 2.0],
            VoxelData::I16(vec![-7, 0, 300]),
        )
        .unwrap();
        let be = to_big_endian(&encode(&v), 2);
        let hdr = VolumeHeaderSummary::parse(&be).unwrap();
        assert!(hdr.big_endian);
        let p = dir.path().join("be.nii");
        fs::write(&p, be).unwrap();
        assert_eq!(read_volume(&p).unwrap(), v);
    }

    #[test]
    fn header_image_pair() {
        let dir = tempfile::tempdir().unwrap();
        let v = Volume::from_mask([2, 2, 1], [1.0; 3], vec![1, 0, 0, 1]).unwrap();
        let single = encode(&v);
        let mut hdr = single[..HEADER_SIZE].to_vec();
        hdr[344..348].copy_from_slice(&MAGIC_PAIR);
        hdr[108..112].copy_from_slice(&0f32.to_le_bytes());
        fs::write(dir.path().join("m.hdr"), hdr).unwrap();
        fs::write(dir.path().join("m.img"), &single[SINGLE_FILE_VOX_OFFSET..]).unwrap();
        assert_eq!(read_volume(dir.path().join("m.hdr")).unwrap(), v);
    }

    #[test]
    fn write_into_missing_dir_fails() {
        let err = write_volume(&cube(2), "/nonexistent-dir-xyz/a.nii").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn json_fixture_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let v = Volume::from_mask([2, 2, 1], [1.0, 0.7, 3.0], vec![1, 0, 1, 1]).unwrap();
        let p = dir.path().join("v.json");
        write_volume(&v, &p).unwrap();
        assert_eq!(read_volume(&p).unwrap(), v);
    }
}
