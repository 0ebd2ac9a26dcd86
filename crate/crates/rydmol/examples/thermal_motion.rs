//! Gate error with quantized molecular motion in a thermal state.

use rydmol::model::GateConfig;
use rydmol::motion::{run_motion_thermal, MotionSpec};

fn main() -> rydmol::Result<()> {
    let config = GateConfig::caf_default();
    let nbar = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let spec = MotionSpec::caf_default(&config, nbar);
    println!("a0 = {:.1} nm, n_max = {}", spec.a0 * 1e9, spec.n_max);
    let r = run_motion_thermal(&config, &spec)?;
    println!("nbar {:.2}: eps_motion {:.3e}, frozen {:.3e}, delta_nbar {:+.2e}", r.nbar, r.eps_motion, r.frozen_error, r.delta_nbar);
    println!("thermal cutoff {} (tail {:.1e}), {} Fock sectors", r.thermal_cutoff, r.tail_mass, r.sectors.len());
    Ok(())
}
