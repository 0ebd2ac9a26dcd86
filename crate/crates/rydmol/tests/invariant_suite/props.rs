// Shared by the `invariants` test target and the acceptance runner via `include!`;
// each includer defines `suite_config()`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use rydmol::budget::{decay_error, detuning_error, nonadiabatic_error, three_atom_budget, two_atom_budget, vdw_error};
use rydmol::constants::{mhz, DEBYE};
use rydmol::evolve::{linspace, propagate, propagate_lindblad, PropagationOptions};
use rydmol::model::{
    build_gate_hamiltonian, build_longrange_hamiltonian, dark_state_at, dd_coupling, decay_jumps, gate_hamiltonian, CouplingSpec,
    DarkSector, DetuningSpec, DipoleChannel, GateConfig, ProtocolSpec, PulseSchedule,
};
use rydmol::motion::{build_motion_hamiltonian, MotionSpec};
use rydmol::numerics::{gate_error, uhlmann_fidelity, DensityMatrix, StateVector};
use rydmol::scaling::DistanceScanSpec;

const CASES: u32 = 128;

fn config(v1_mhz: f64, v2_mhz: f64, t_us: f64, dl_mhz: f64, dam_mhz: f64) -> GateConfig {
    let mut c = GateConfig::caf_default();
    c.pulse = PulseSchedule::sine_with_area(t_us * 1e-6, 2.0 * PI).unwrap();
    c.coupling = CouplingSpec { v_1a: mhz(v1_mhz), v_2a: mhz(v2_mhz) };
    c.detuning = DetuningSpec { delta_l: mhz(dl_mhz), delta_am: mhz(dam_mhz) };
    c
}

fn complex_matrix(n: usize, parts: &[f64]) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |i, j| C64::new(parts[2 * (i * n + j)], parts[2 * (i * n + j) + 1]))
}

fn random_density(n: usize, parts: &[f64]) -> DensityMatrix {
    let a = complex_matrix(n, parts);
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / C64::new(tr, 0.0)).unwrap()
}

fn random_unitary(n: usize, parts: &[f64]) -> DMatrix<C64> {
    complex_matrix(n, parts).qr().q()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(suite_config())]

    fn gate_hamiltonian_is_hermitian(
        v1 in -20.0..20.0f64, v2 in -20.0..20.0f64, t in 0.2..3.0f64,
        dl in -1.0..1.0f64, dam in -1.0..1.0f64, frac in 0.0..1.0f64, decay in any::<bool>(),
    ) {
        let mut c = config(v1, v2, t, dl, dam);
        c.include_decay = decay;
        let h = build_gate_hamiltonian(&c, frac * c.pulse.duration).unwrap();
        prop_assert!(h.hermiticity_defect() <= 1e-12 * h.max_abs().max(1.0));
    }

    fn longrange_hamiltonian_is_hermitian(
        v in 1.0..20.0f64, t1 in 0.1..0.5f64, t2 in 0.1..0.5f64, v_rr in 0.0..100.0f64, v_rR in 1.0..100.0f64,
        three in any::<bool>(), frac in 0.0..1.0f64,
    ) {
        let c = config(v, v, 1.0, 0.0, 0.0);
        let p = if three {
            ProtocolSpec::three_atom(t1 * 1e-6, t2 * 1e-6, mhz(v_rr), mhz(v_rR)).unwrap()
        } else {
            ProtocolSpec::two_atom(t1 * 1e-6, t2 * 1e-6, mhz(v_rr)).unwrap()
        };
        let h = build_longrange_hamiltonian(&c, &p, frac * p.duration()).unwrap();
        prop_assert!(h.hermiticity_defect() <= 1e-12 * h.max_abs());
    }

    fn motion_hamiltonian_is_hermitian(v in 1.0..5.0f64, nbar in 0.0..2.0f64, n_max in 3usize..5, frac in 0.0..1.0f64) {
        let c = config(v, v, 1.25, 0.0, 0.0);
        let spec = MotionSpec { n_max, ..MotionSpec::caf_default(&c, nbar) };
        let h = build_motion_hamiltonian(&c, &spec, frac * c.pulse.duration).unwrap();
        prop_assert!(h.hermiticity_defect() <= 1e-12 * h.max_abs());
    }

    fn schrodinger_preserves_norm(
        v1 in 1.0..10.0f64, v2 in 1.0..10.0f64, t in 0.3..2.0f64, dl in -0.5..0.5f64,
        amps in prop::collection::vec(-1.0..1.0f64, 8),
    ) {
        let c = config(v1, v2, t, dl, 0.0);
        let (layout, h) = gate_hamiltonian(&c).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); layout.dim()];
        for (k, (m1, m2)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
            psi[layout.index(m1, m2, &[0])] = C64::new(amps[2 * k], amps[2 * k + 1]);
        }
        prop_assume!(psi.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3);
        let psi = StateVector::normalized(psi).unwrap();
        let traj = propagate(&h, &psi, &linspace(0.0, c.pulse.duration, 3), &PropagationOptions::with_tol(1e-10)).unwrap();
        for s in &traj.states {
            prop_assert!((s.norm_squared() - 1.0).abs() < 1e-8);
        }
    }

    fn lindblad_preserves_trace_and_hermiticity(
        v in 1.0..6.0f64, t in 0.5..1.5f64, tau_r in 0.5..100.0f64, tau_R in 0.5..100.0f64, input in 0usize..4,
    ) {
        let mut c = config(v, v, t, 0.0, 0.0);
        c.include_decay = true;
        c.decay.gamma_r = 1e6 / tau_r;
        c.decay.gamma_R = 1e6 / tau_R;
        let (layout, h) = gate_hamiltonian(&c).unwrap();
        let jumps = decay_jumps(&layout, &c.decay).unwrap();
        let (m1, m2) = [(0, 0), (0, 1), (1, 0), (1, 1)][input];
        let rho0 = DensityMatrix::from_pure(&StateVector::basis(layout.dim(), layout.index(m1, m2, &[0])).unwrap());
        let traj = propagate_lindblad(&h, &jumps, &rho0, &[0.0, c.pulse.duration], &PropagationOptions::with_tol(1e-10)).unwrap();
        let rho = traj.final_state();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-8);
        prop_assert!(rydmol::numerics::hermiticity_defect(rho.matrix()) < 1e-8);
    }

    fn dark_states_are_annihilated(v1 in 0.5..20.0f64, v2 in 0.5..20.0f64, t in 0.3..3.0f64, frac in 0.0..1.0f64, which in 0usize..3) {
        let c = config(v1, v2, t, 0.0, 0.0);
        let time = frac * c.pulse.duration;
        let sector = match which {
            0 => DarkSector::Single,
            1 => DarkSector::SingleFirst,
            _ => DarkSector::Double { v_1a: c.coupling.v_1a, v_2a: c.coupling.v_2a },
        };
        let u = dark_state_at(&c, sector, time).unwrap();
        let hu = build_gate_hamiltonian(&c, time).unwrap().apply(&u).unwrap();
        // Measured in units of 2π × 1 MHz, the config frequency unit.
        prop_assert!(hu.norm() / mhz(1.0) < 1e-9);
    }

    fn fidelity_metric_properties(n in 2usize..6, a in prop::collection::vec(-1.0..1.0f64, 72), b in prop::collection::vec(-1.0..1.0f64, 72), u in prop::collection::vec(-1.0..1.0f64, 72)) {
        let rho = random_density(n, &a);
        let sigma = random_density(n, &b);
        let f = uhlmann_fidelity(&rho, &sigma).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - uhlmann_fidelity(&sigma, &rho).unwrap()).abs() < 1e-9);
        prop_assert!((uhlmann_fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
        prop_assert!((gate_error(&rho, &sigma).unwrap() - (1.0 - f)).abs() < 1e-15);
        let q = random_unitary(n, &u);
        let rot = |d: &DensityMatrix| DensityMatrix::new(&q * d.matrix() * q.adjoint()).unwrap();
        prop_assert!((uhlmann_fidelity(&rot(&rho), &rot(&sigma)).unwrap() - f).abs() < 1e-9);
    }

    fn fidelity_of_pure_states_is_overlap(n in 2usize..8, a in prop::collection::vec(-1.0..1.0f64, 16), b in prop::collection::vec(-1.0..1.0f64, 16)) {
        let amps = |p: &[f64]| (0..n).map(|k| C64::new(p[2 * k], p[2 * k + 1])).collect::<Vec<_>>();
        let (x, y) = (amps(&a), amps(&b));
        prop_assume!(x.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-2 && y.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-2);
        let (psi, phi) = (StateVector::normalized(x).unwrap(), StateVector::normalized(y).unwrap());
        let f = uhlmann_fidelity(&psi.to_density(), &phi.to_density()).unwrap();
        let ov = psi.inner(&phi).unwrap().norm_sqr();
        prop_assert!((f - ov).abs() < 1e-8, "f {f:e} overlap {ov:e}");
    }

    fn atom_molecule_coupling_falls_as_inverse_cube(d_a in 100.0..3000.0f64, d_m in 0.1..5.0f64, x in 0.3..3.0f64, s in 0.2..5.0f64) {
        let ch = [DipoleChannel { p_atom: 0, p_mol: 0, d_atom: d_a * DEBYE, d_mol: d_m * DEBYE }];
        let v = dd_coupling(&ch, x * 1e-6).unwrap();
        let vs = dd_coupling(&ch, s * x * 1e-6).unwrap();
        prop_assert!(rel(vs, v / s.powi(3)) < 1e-12);
    }

    fn calibrated_interactions_follow_power_laws(x0 in 2.0..30.0f64, v_rR in 0.1..100.0f64, v_rr in 0.001..100.0f64, s in 0.2..5.0f64) {
        let (c3, c6) = DistanceScanSpec::calibrate(x0 * 1e-6, mhz(v_rR), mhz(v_rr)).unwrap();
        let spec = DistanceScanSpec { c3_rR: c3, c6_rr: c6, x_values: vec![x0 * 1e-6], t1: 3e-7, t2: 1e-7, v_dd_fixed: mhz(19.0), gamma_r: 1e4, gamma_R: 1e4 };
        let x = x0 * 1e-6;
        prop_assert!(rel(spec.v_rR(x), mhz(v_rR)) < 1e-12);
        prop_assert!(rel(spec.v_rr(x), mhz(v_rr)) < 1e-12);
        prop_assert!(rel(spec.v_rR(s * x), spec.v_rR(x) / s.powi(3)) < 1e-12);
        prop_assert!(rel(spec.v_rr(s * x), spec.v_rr(x) / s.powi(6)) < 1e-12);
    }

    fn blockade_and_outer_terms_scale_with_distance(v_rr in 0.01..100.0f64, s in 0.5..2.0f64) {
        let (gr, gR, v) = (1e4, 8e3, mhz(19.0));
        let b = |vrr: f64| two_atom_budget(gr, gR, v, vrr, 3e-7, 3e-7).unwrap().blockade;
        let o = |vrr: f64| three_atom_budget(gr, gR, v, mhz(50.0), vrr, 3e-7, 1e-7).unwrap().outer_interaction;
        // V_rr ∝ x⁻⁶: ε_B2 grows as x¹², ε_I3 falls as x⁻¹².
        let (v0, vs) = (mhz(v_rr), mhz(v_rr) / s.powi(6));
        prop_assert!(rel(b(vs), b(v0) * s.powi(12)) < 1e-10);
        prop_assert!(rel(o(vs), o(v0) / s.powi(12)) < 1e-10);
    }

    fn budget_is_invariant_under_time_rescaling(v in 1.0..10.0f64, t in 0.5..3.0f64, tau_r in 10.0..300.0f64, tau_R in 10.0..300.0f64, d in 0.01..0.5f64, l in 0.1..10.0f64) {
        let (v, t, gr, gR, d) = (mhz(v), t * 1e-6, 1e6 / tau_r, 1e6 / tau_R, mhz(d));
        prop_assert!(rel(nonadiabatic_error(l * v, t / l).unwrap(), nonadiabatic_error(v, t).unwrap()) < 1e-10);
        prop_assert!(rel(decay_error(l * gr, l * gR, l * v, t / l).unwrap(), decay_error(gr, gR, v, t).unwrap()) < 1e-10);
        let e0 = detuning_error(d, 2.0 * d, v, t).unwrap().total();
        prop_assert!(rel(detuning_error(l * d, 2.0 * l * d, l * v, t / l).unwrap().total(), e0) < 1e-10);
        prop_assert!(rel(vdw_error(l * v, l * mhz(3000.0), 0.2, t / l).unwrap(), vdw_error(v, mhz(3000.0), 0.2, t).unwrap()) < 1e-10);
    }
}

/// Every property, runnable by name.
pub const SUITE: &[(&str, fn())] = &[
    ("gate_hamiltonian_is_hermitian", gate_hamiltonian_is_hermitian),
    ("longrange_hamiltonian_is_hermitian", longrange_hamiltonian_is_hermitian),
    ("motion_hamiltonian_is_hermitian", motion_hamiltonian_is_hermitian),
    ("schrodinger_preserves_norm", schrodinger_preserves_norm),
    ("lindblad_preserves_trace_and_hermiticity", lindblad_preserves_trace_and_hermiticity),
    ("dark_states_are_annihilated", dark_states_are_annihilated),
    ("fidelity_metric_properties", fidelity_metric_properties),
    ("fidelity_of_pure_states_is_overlap", fidelity_of_pure_states_is_overlap),
    ("atom_molecule_coupling_falls_as_inverse_cube", atom_molecule_coupling_falls_as_inverse_cube),
    ("calibrated_interactions_follow_power_laws", calibrated_interactions_follow_power_laws),
    ("blockade_and_outer_terms_scale_with_distance", blockade_and_outer_terms_scale_with_distance),
    ("budget_is_invariant_under_time_rescaling", budget_is_invariant_under_time_rescaling),
];
