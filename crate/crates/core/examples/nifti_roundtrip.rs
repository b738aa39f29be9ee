//! Write a volume as plain and gzipped NIfTI, read both back, compare.
//!
//! NIfTI stores spacing as f32, so only f32-representable spacings survive
//! exactly; 0.75 does, 0.8 does not.

use lesion_eval::volume::nifti::read_header;
use lesion_eval::{read_volume, write_volume, Volume, VoxelData};

fn main() -> lesion_eval::Result<()> {
    let dims = [32, 32, 16];
    let mut data = vec![0i16; dims.iter().product()];
    for (i, v) in data.iter_mut().enumerate() {
        *v = ((i * 7919) % 13) as i16 - 6;
    }
    let vol = Volume::new(dims, [0.75, 0.75, 2.5], VoxelData::I16(data))?;

    let dir = std::env::temp_dir().join("lesion-eval-nifti-roundtrip");
    std::fs::create_dir_all(&dir).expect("temp dir is writable");
    for name in ["scan.nii", "scan.nii.gz"] {
        let path = dir.join(name);
        write_volume(&vol, &path)?;
        let back = read_volume(&path)?;
        let size = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
        println!("{name:12} {size:>7} bytes  identical: {}", back == vol);
    }

    let h = read_header(dir.join("scan.nii.gz"))?;
    println!("datatype {} dim {:?} pixdim {:?}", h.datatype_code, &h.dim[..4], &h.pixdim[1..4]);

    let odd = Volume::new([2, 2, 2], [0.8, 0.8, 0.8], VoxelData::U8(vec![0; 8]))?;
    write_volume(&odd, dir.join("odd.nii"))?;
    println!("0.8 mm reads back as {:?}", read_volume(dir.join("odd.nii"))?.spacing()[0]);
    Ok(())
}
