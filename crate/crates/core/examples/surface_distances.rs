//! HD95 and ASSD between two lesions, in mm and in voxels.

use lesion_eval::metrics::{assd, hd95, Hd95Variant, SurfaceDistances};

fn ball(c: [usize; 3], r: f64) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for z in 0..32 {
        for y in 0..32 {
            for x in 0..32 {
                let d2 = [x, y, z].iter().zip(c).map(|(&a, b)| (a as f64 - b as f64).powi(2)).sum::<f64>();
                if d2 <= r * r {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

fn main() -> lesion_eval::Result<()> {
    let gt = ball([15, 15, 15], 6.0);
    let pred = ball([17, 15, 15], 5.0);
    for (label, spacing) in [("voxels", [1.0; 3]), ("mm (0.5 x 0.5 x 3)", [0.5, 0.5, 3.0])] {
        let d = SurfaceDistances::between(&gt, &pred, spacing)?;
        println!("{label}");
        println!("    surface voxels: {} / {}", d.a_to_b.len(), d.b_to_a.len());
        println!("    HD95 pooled:          {:.3}", hd95(&gt, &pred, spacing, Hd95Variant::Pooled)?);
        println!("    HD95 max of directed: {:.3}", hd95(&gt, &pred, spacing, Hd95Variant::MaxOfDirected)?);
        println!("    ASSD:                 {:.3}", assd(&gt, &pred, spacing)?);
    }
    Ok(())
}
