//! Adiabatic following of the |01g> dark state, printed as a population trajectory.

use rydmol::evolve::{linspace, propagate, PropagationOptions};
use rydmol::model::{dark_state_at, gate_hamiltonian, DarkSector, GateConfig, Layout};
use rydmol::numerics::StateVector;

fn main() -> rydmol::Result<()> {
    let config = GateConfig::caf_default();
    let (layout, h): (Layout, _) = gate_hamiltonian(&config)?;
    let start = layout.index(0, 1, &[0]);
    let times = linspace(0.0, config.pulse.duration, 26);
    let traj = propagate(&h, &StateVector::basis(layout.dim(), start)?, &times, &PropagationOptions::default())?;
    let r = layout.index(0, 1, &[1]);
    let big_r = layout.index(0, 2, &[2]);
    println!("t_us,p_01g,p_01r,p_02R,overlap_dark");
    for (t, psi) in traj.times.iter().zip(&traj.states) {
        let dark = dark_state_at(&config, DarkSector::Single, *t)?;
        let p = psi.populations();
        let overlap = dark.inner(psi)?.norm_sqr();
        println!("{:.4},{:.6},{:.6},{:.6},{:.6}", t * 1e6, p[start], p[r], p[big_r], overlap);
    }
    Ok(())
}
