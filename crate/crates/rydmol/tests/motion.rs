use rydmol::model::GateConfig;
use rydmol::motion::{run_motion_thermal, MotionSpec, MAX_TAIL};
use rydmol::Error;

fn spec(nbar: f64) -> (GateConfig, MotionSpec) {
    let c = GateConfig::caf_default();
    let s = MotionSpec::caf_default(&c, nbar);
    (c, s)
}

#[test]
fn rigid_trap_has_no_motional_error() {
    let (c, mut s) = spec(0.0);
    s.a0 = 0.0;
    let r = run_motion_thermal(&c, &s).unwrap();
    assert!(r.eps_motion.abs() < 1e-7, "{}", r.eps_motion);
    assert!(r.delta_nbar.abs() < 1e-10);
}

#[test]
fn sectors_conserve_norm_and_weights_sum_to_one() {
    let (c, s) = spec(0.25);
    let r = run_motion_thermal(&c, &s).unwrap();
    assert!(r.tail_mass < MAX_TAIL);
    let total: f64 = r.sectors.iter().map(|x| x.weight).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(r.sectors.iter().all(|x| x.norm_defect < 1e-8));
}

#[test]
fn fock_window_is_converged() {
    let (c, s6) = spec(0.25);
    let s8 = MotionSpec { n_max: 8, ..s6 };
    let a = run_motion_thermal(&c, &s6).unwrap().eps_motion;
    let b = run_motion_thermal(&c, &s8).unwrap().eps_motion;
    assert!((a / b - 1.0).abs() < 0.05, "{a} vs {b}");
}

#[test]
fn error_grows_with_temperature() {
    let (c, s0) = spec(0.0);
    let a = run_motion_thermal(&c, &s0).unwrap().eps_motion;
    let b = run_motion_thermal(&c, &MotionSpec { nbar: 0.25, ..s0 }).unwrap().eps_motion;
    assert!(b > a && a > 0.0, "{a} {b}");
}

#[test]
fn short_thermal_cutoff_is_refused() {
    let (c, s) = spec(2.0);
    let r = run_motion_thermal(&c, &MotionSpec { thermal_cutoff: Some(1), ..s });
    assert!(matches!(r, Err(Error::ThermalTail { .. })), "{r:?}");
}
