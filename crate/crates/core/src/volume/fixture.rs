use serde::{Deserialize, Serialize};

use super::{Volume, VoxelData};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Fixture {
    dims: [usize; 3],
    spacing: [f64; 3],
    data: Vec<f64>,
}

pub(super) fn from_json(text: &str) -> Result<Volume> {
    let fx: Fixture = serde_json::from_str(text)?;
    // Small non-negative integers (the usual 0/1 masks) come back as u8.
    let as_u8 = fx
        .data
        .iter()
        .all(|&v| v.fract() == 0.0 && (0.0..=255.0).contains(&v));
    let data = if as_u8 {
        VoxelData::U8(fx.data.iter().map(|&v| v as u8).collect())
    } else {
        VoxelData::F64(fx.data)
    };
    Volume::new(fx.dims, fx.spacing, data)
}

pub(super) fn to_json(v: &Volume) -> Result<String> {
    let fx = Fixture {
        dims: v.dims(),
        spacing: v.spacing(),
        data: v.data().to_f64(),
    };
    serde_json::to_string(&fx).map_err(Error::from)
}
