//! Two- and three-atom long-range CZ gates: simulation against the analytic budgets.

#![allow(non_snake_case)]

use rydmol::budget::{three_atom_budget, two_atom_budget};
use rydmol::constants::mhz;
use rydmol::gates::{run_cz_three_atom, run_cz_two_atom, GateOptions};
use rydmol::model::{CouplingSpec, GateConfig, ProtocolSpec};

fn main() -> rydmol::Result<()> {
    let mut config = GateConfig::caf_default();
    config.coupling = CouplingSpec::symmetric(2.0 * mhz(9.5));
    config.include_decay = true;
    let v_dd = 2.0 * mhz(9.5);
    let (gr, gR) = (config.decay.gamma_r, config.decay.gamma_R);
    let opts = GateOptions::default();

    let (t1, t2, v_rr) = (0.3e-6, 0.3e-6, mhz(500.0));
    let two = run_cz_two_atom(&config, &ProtocolSpec::two_atom(t1, t2, v_rr)?, &opts)?;
    let b2 = two_atom_budget(gr, gR, v_dd, v_rr, t1, t2)?;
    println!("two atoms:   simulated {:.2e}  analytic {:.2e}", two.superposition_error, b2.total);

    let (t1, t2, v_rr, v_rR) = (0.3e-6, 0.1e-6, mhz(0.02), mhz(60.0));
    let three = run_cz_three_atom(&config, &ProtocolSpec::three_atom(t1, t2, v_rr, v_rR)?, &opts)?;
    let b3 = three_atom_budget(gr, gR, v_dd, v_rR, v_rr, t1, t2)?;
    println!("three atoms: simulated {:.2e}  analytic {:.2e}", three.superposition_error, b3.total);
    println!("three-atom phases/pi: {:?}", three.acquired_phases.map(|p| (p / std::f64::consts::PI * 1e3).round() / 1e3));
    Ok(())
}
