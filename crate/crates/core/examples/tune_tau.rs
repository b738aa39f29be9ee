//! Sweep the IoU threshold over synthetic cases with known correspondences.

use lesion_eval::synth::{default_sweep_grid, generate_case, tau_sweep, SynthParams};

fn main() -> lesion_eval::Result<()> {
    let params = SynthParams::default();
    let cases = (0..40).map(|seed| generate_case(&params, seed)).collect::<lesion_eval::Result<Vec<_>>>()?;
    let r = tau_sweep(&cases, &default_sweep_grid())?;
    for (t, f) in r.taus.iter().zip(&r.f1_at_tau) {
        println!("{t:.2} {f:.4} {}", "#".repeat((f * 50.0).round() as usize));
    }
    println!("best tau {:.2} (evaluation default remains {})", r.best_tau, lesion_eval::DEFAULT_TAU);
    Ok(())
}
