//! Voxel-wise Dice can look excellent while most lesions are missed.
//!
//! The ground truth holds one large lesion (1000 voxels) and five small ones
//! (10 voxels each); the prediction finds only the large one.

use lesion_eval::{evaluate_pair, EvalConfig, Volume};

fn cube(mask: &mut [u8], dims: [usize; 3], at: [usize; 3], ext: [usize; 3]) {
    for z in at[2]..at[2] + ext[2] {
        for y in at[1]..at[1] + ext[1] {
            for x in at[0]..at[0] + ext[0] {
                mask[x + dims[0] * (y + dims[1] * z)] = 1;
            }
        }
    }
}

fn main() -> lesion_eval::Result<()> {
    let dims = [40, 40, 20];
    let mut gt = vec![0u8; dims.iter().product()];
    let mut pred = gt.clone();
    cube(&mut gt, dims, [2, 2, 2], [10, 10, 10]);
    cube(&mut pred, dims, [2, 2, 2], [10, 10, 10]);
    for k in 0..5 {
        cube(&mut gt, dims, [20 + 3 * k, 30, 5], [1, 2, 5]);
    }
    let gt = Volume::from_mask(dims, [1.0; 3], gt)?;
    let pred = Volume::from_mask(dims, [1.0; 3], pred)?;

    let s = evaluate_pair("divergence", &gt, &pred, &EvalConfig::default())?;
    let d = s.detection;
    println!("voxel-wise Dice     {:.4}", s.image.voxel_dice.unwrap_or(f64::NAN));
    println!("lesions GT/pred     {} / {}", s.gt_lesions, s.pred_lesions);
    println!("TP FP FN            {} {} {}", d.tp, d.fp, d.fn_);
    println!("lesion-wise recall  {:.4}", d.recall.unwrap_or(f64::NAN));
    println!("lesion-wise F1      {:.4}", d.f1.unwrap_or(f64::NAN));
    for b in &s.bins {
        println!(
            "    {:<10} n_gt {} recall {}",
            b.bin.key(),
            b.n_gt,
            b.detection.recall.map_or("-".into(), |r| format!("{r:.2}"))
        );
    }
    Ok(())
}
