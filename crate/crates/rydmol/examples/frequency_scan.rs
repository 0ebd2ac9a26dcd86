//! Optimized gate error against the molecular rotational frequency (d_M = 2 D, 300 K and 0 K).

use rydmol::constants::DEBYE;
use rydmol::scaling::{error_vs_frequency_curve, write_frequency_csv, Environment, ScalingAnchors};

fn main() -> rydmol::Result<()> {
    let anchors = ScalingAnchors::caf();
    let f: Vec<f64> = (2..=20).map(|g| g as f64 * 1e9).collect();
    for env in [Environment::Room, Environment::Zero] {
        println!("# {env:?}");
        let rows = error_vs_frequency_curve(&anchors, &f, 2.0 * DEBYE, env, 0.2)?;
        write_frequency_csv(&rows, std::io::stdout().lock())?;
    }
    Ok(())
}
