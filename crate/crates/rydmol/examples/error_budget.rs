//! Itemized analytic error budget for CaF/Rb at 1 part in 10^4 field stability.

use rydmol::budget::{full_budget, BudgetExtras, FieldInducedSpec, NnnSpec};
use rydmol::constants::{mhz, DEBYE};
use rydmol::model::GateConfig;

fn main() -> rydmol::Result<()> {
    let mut config = GateConfig::caf_default();
    // Electric-field noise of 1e-4 relative: 457 MHz and 2400 MHz sensitivities.
    config.detuning.delta_l = mhz(0.0457);
    config.detuning.delta_am = mhz(0.0457 + 0.24);
    let extras = BudgetExtras {
        e_ryd: Some(mhz(3000.0)),
        nnn: Some(NnnSpec::square_lattice(mhz(2.0))),
        molecule_molecule: Some((3.07 * DEBYE, 2e-6)),
        field_induced: Some(FieldInducedSpec { mu0: 3.0 * DEBYE, stark_ratio: 0.1, x_am: 1e-6 }),
        ..Default::default()
    };
    let b = full_budget(&config, &extras)?;
    for t in &b.terms {
        let mark = if t.included { ' ' } else { '*' };
        println!("{:<20}{mark} {:.2e}", t.name, t.value);
    }
    println!("{:<21} {:.2e}", "total", b.total);
    for n in &b.notes {
        println!("* {n}");
    }
    Ok(())
}
