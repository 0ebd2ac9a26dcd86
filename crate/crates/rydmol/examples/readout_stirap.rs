//! Atom-assisted readout: STIRAP transfer conditioned on the molecular state.

use rydmol::gates::{run_readout_stirap, GateOptions, StirapSpec};
use rydmol::model::GateConfig;

fn main() -> rydmol::Result<()> {
    let spec = StirapSpec::default();
    let r = run_readout_stirap(&GateConfig::caf_default(), &spec, &GateOptions::default())?;
    println!("pulse width {:.0} us, delay {:.0} us", spec.width * 1e6, spec.delay * 1e6);
    println!("P(transfer | 0) = {:.7}", r.p_transfer_given_0);
    println!("P(stay | 1)     = {:.7}", r.p_stay_given_1);
    Ok(())
}
