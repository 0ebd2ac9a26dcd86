//! Single-atom CZ gate at the CaF/Rb working point, without decay.

use rydmol::gates::{run_cz_single_atom, GateOptions};
use rydmol::model::GateConfig;

fn main() -> rydmol::Result<()> {
    let config = GateConfig::caf_default();
    let r = run_cz_single_atom(&config, &GateOptions::default())?;
    println!("superposition error  {:.3e}", r.superposition_error);
    println!("projected error      {:.3e}", r.projected_error);
    println!("input  phase/pi  |<target|final>|^2  max Rydberg");
    for (k, label) in ["00", "01", "10", "11"].iter().enumerate() {
        println!(
            "|{label}>  {:+.4}     {:.6}            {:.4}",
            r.acquired_phases[k] / std::f64::consts::PI,
            r.truth_table_fidelities[k],
            r.max_excitation[k][0]
        );
    }
    Ok(())
}
