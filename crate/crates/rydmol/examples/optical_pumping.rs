//! Qubit initialization by dissipative pumping through the atom.

use rydmol::gates::{run_initialization, GateOptions, PumpingSpec};
use rydmol::model::GateConfig;

fn main() -> rydmol::Result<()> {
    let spec = PumpingSpec::default();
    let r = run_initialization(&GateConfig::caf_default(), &spec, &GateOptions::default())?;
    println!("effective Rabi {:.3e} rad/s, predicted time constant {:.1} us", r.effective_rabi, r.predicted_time_constant * 1e6);
    if let Some(t) = r.fitted_time_constant {
        println!("fitted time constant {:.1} us", t * 1e6);
    }
    for (d, p) in r.durations.iter().zip(&r.p_pumped) {
        println!("{:>6.0} us  {:.4} {:.4} {:.4}", d * 1e6, p[0], p[1], p[2]);
    }
    Ok(())
}
