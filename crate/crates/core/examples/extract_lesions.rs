//! Connected components under the three neighborhoods.

use lesion_eval::components::lesion_stats;
use lesion_eval::{find_connected_components, Connectivity, Volume};

fn main() -> lesion_eval::Result<()> {
    let dims = [6, 6, 3];
    let mut mask = vec![0u8; dims.iter().product()];
    let mut set = |x: usize, y: usize, z: usize| mask[x + dims[0] * (y + dims[1] * z)] = 1;
    // A 2x2x1 block, a voxel touching it along an edge, and one touching only
    // at a corner.
    set(0, 0, 0);
    set(1, 0, 0);
    set(0, 1, 0);
    set(1, 1, 0);
    set(2, 2, 0);
    set(3, 3, 1);
    // Something unrelated.
    set(5, 5, 2);
    let vol = Volume::from_mask(dims, [1.0, 1.0, 3.0], mask)?;

    for conn in Connectivity::ALL {
        let lesions = find_connected_components(&vol, conn)?;
        println!("{conn}-connectivity: {} lesions", lesions.len());
        for s in lesion_stats(&lesions) {
            println!(
                "    id {} {:>2} voxels {:>5.1} mm3 centroid {:?}",
                s.id, s.volume_vox, s.volume_mm3, s.centroid
            );
        }
    }
    Ok(())
}
