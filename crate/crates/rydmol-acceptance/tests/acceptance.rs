//! One PASS/FAIL line per acceptance criterion, followed by indented detail lines.
//! Exits nonzero when any criterion fails.

#![allow(non_snake_case)]

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use rydmol::budget::{
    decay_error, detuning_error, nnn_error, nonadiabatic_error, one_plus_j0_pi, simplified_decay, simplified_detuning,
    three_atom_budget, two_atom_budget, zeta, NnnSpec,
};
use rydmol::constants::{mhz, DEBYE};
use rydmol::evolve::{adiabatic_trajectory, integrated_population, linspace, propagate, PropagationOptions};
use rydmol::gates::{run_cz_single_atom, run_cz_three_atom, run_readout_stirap, GateOptions, StirapSpec, TargetKind};
use rydmol::model::{atom, gate_hamiltonian, CouplingSpec, DarkSector, GateConfig, Layout, ProtocolSpec, PulseSchedule};
use rydmol::motion::{run_motion_sqrt_scan, run_position_perturbation, Displacement, MotionSpec};
use rydmol::numerics::StateVector;
use rydmol::scaling::{error_vs_frequency_curve, DistanceScanSpec, Environment, ScalingAnchors};

mod invariants {
    fn suite_config() -> proptest::test_runner::Config {
        proptest::test_runner::Config { failure_persistence: None, ..proptest::test_runner::Config::with_cases(CASES) }
    }

    include!("../../rydmol/tests/invariant_suite/props.rs");
}

type Outcome = Result<bool, String>;

struct Report {
    failures: usize,
}

impl Report {
    fn run(&mut self, id: u32, title: &str, check: impl FnOnce(&mut Vec<String>) -> Outcome) {
        let start = Instant::now();
        let mut details = Vec::new();
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&mut details))).unwrap_or_else(|_| Err("panicked".into()));
        let verdict = match &outcome {
            Ok(true) => "PASS",
            _ => "FAIL",
        };
        if verdict == "FAIL" {
            self.failures += 1;
        }
        println!("{verdict} criterion {id:>2}: {title} ({:.1} s)", start.elapsed().as_secs_f64());
        for d in details {
            println!("        {d}");
        }
        if let Err(e) = outcome {
            println!("        error: {e}");
        }
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISS"
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `V_dd/2 = 2π×2.02 MHz`.
fn v_dd() -> f64 {
    2.0 * mhz(2.02)
}

fn caf(t: f64) -> GateConfig {
    let mut c = GateConfig::caf_default();
    c.pulse = PulseSchedule::sine_with_area(t, 2.0 * PI).unwrap();
    c
}

fn opts() -> GateOptions {
    GateOptions::default()
}

// Gate reproduction at Ω_max = 2π×1.3 MHz.
fn criterion_1(d: &mut Vec<String>) -> Outcome {
    const TARGET: f64 = 5e-4;
    const BAND: f64 = 0.5;
    const MIN_OVERLAP: f64 = 0.999;
    const PHASE_TOL: f64 = 0.05;
    let mut c = GateConfig::caf_default();
    c.pulse = PulseSchedule::sine(1.25e-6, mhz(1.3)).map_err(|e| e.to_string())?;
    let r = run_cz_single_atom(&c, &opts()).map_err(|e| e.to_string())?;
    let err_ok = rel(r.superposition_error, TARGET) <= BAND;
    d.push(format!(
        "pulse area {:.4}π; superposition error {:.3e} (want {TARGET:.1e} ±{:.0}%) {}",
        c.pulse.area() / PI,
        r.superposition_error,
        BAND * 100.0,
        mark(err_ok)
    ));
    let signs = TargetKind::U1.signs();
    let mut all = err_ok && r.target == TargetKind::U1;
    for (k, label) in ["00", "01", "10", "11"].iter().enumerate() {
        let want = if signs[k] == signs[TargetKind::U1.reference()] { 0.0 } else { PI };
        let phase_ok = (r.acquired_phases[k].abs() - want).abs() < PHASE_TOL;
        let f_ok = r.truth_table_fidelities[k] > MIN_OVERLAP;
        all &= phase_ok && f_ok;
        d.push(format!(
            "|{label}>: phase {:+.4} rad (want {want:.4}, tol {PHASE_TOL}) {}, |<target|final>|^2 {:.6} (want > {MIN_OVERLAP}) {}",
            r.acquired_phases[k],
            mark(phase_ok),
            r.truth_table_fidelities[k],
            mark(f_ok)
        ));
    }
    let area = run_cz_single_atom(&caf(1.25e-6), &opts()).map_err(|e| e.to_string())?;
    d.push(format!(
        "reference: exact 2π area (Ω_max = 2π×{:.4} MHz) gives error {:.3e}, min overlap {:.6}",
        caf(1.25e-6).pulse.omega_max / mhz(1.0),
        area.superposition_error,
        area.truth_table_fidelities.iter().cloned().fold(1.0, f64::min)
    ));
    Ok(all)
}

fn criterion_2(d: &mut Vec<String>) -> Outcome {
    const TARGET: f64 = 1.4e-3;
    const ABS_TOL: f64 = 0.1e-3;
    const SIM_TOL: f64 = 0.25;
    let t = 1.25e-6;
    let c = caf(t);
    let e_g = decay_error(c.decay.gamma_r, c.decay.gamma_R, v_dd(), t).map_err(|e| e.to_string())?;
    let e_na = nonadiabatic_error(v_dd(), t).map_err(|e| e.to_string())?;
    let analytic_ok = (e_g - TARGET).abs() <= ABS_TOL;
    d.push(format!("decay_error {e_g:.4e} (want {TARGET:.1e} ± {ABS_TOL:.1e}) {}", mark(analytic_ok)));
    let sim = run_cz_single_atom(&GateConfig { include_decay: true, ..c }, &opts()).map_err(|e| e.to_string())?;
    let budget = e_g + e_na;
    let sim_ok = rel(sim.superposition_error, budget) <= SIM_TOL;
    d.push(format!(
        "Lindblad error {:.4e} vs eps_decay + eps_NA = {budget:.4e}: {:+.1}% (tol {:.0}%) {}",
        sim.superposition_error,
        (sim.superposition_error / budget - 1.0) * 100.0,
        SIM_TOL * 100.0,
        mark(sim_ok)
    ));
    Ok(analytic_ok && sim_ok)
}

fn criterion_3(d: &mut Vec<String>) -> Outcome {
    const TOL: f64 = 0.2;
    const SLOPE: f64 = -4.0;
    const SLOPE_TOL: f64 = 0.3;
    let mut all = true;
    let mut pts = Vec::new();
    for k in [8.0, 10.0, 12.0, 14.0] {
        let t = k * PI / v_dd();
        let sim = run_cz_single_atom(&caf(t), &opts()).map_err(|e| e.to_string())?.superposition_error;
        let analytic = nonadiabatic_error(v_dd(), t).map_err(|e| e.to_string())?;
        let ok = rel(sim, analytic) <= TOL;
        all &= ok;
        pts.push((t.ln(), sim.ln()));
        d.push(format!("V T = {k:>2}π: simulated {sim:.4e}, analytic {analytic:.4e}, {:+.1}% (tol {:.0}%) {}", (sim / analytic - 1.0) * 100.0, TOL * 100.0, mark(ok)));
    }
    let slope = fit_slope(&pts);
    let slope_ok = (slope - SLOPE).abs() <= SLOPE_TOL;
    d.push(format!("log-log slope {slope:.3} (want {SLOPE} ± {SLOPE_TOL}) {}", mark(slope_ok)));
    Ok(all && slope_ok)
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_4(d: &mut Vec<String>) -> Outcome {
    const TOL_00R: f64 = 1e-4;
    const TOL_02R: f64 = 1e-3;
    let t = 10.0 * PI / v_dd();
    let c = caf(t);
    let times = linspace(0.0, t, 2001);
    let (layout, h) = gate_hamiltonian(&c).map_err(|e| e.to_string())?;
    let start = StateVector::basis(layout.dim(), layout.index(0, 0, &[atom::g])).map_err(|e| e.to_string())?;
    let traj = propagate(&h, &start, &times, &PropagationOptions::with_tol(1e-12)).map_err(|e| e.to_string())?;
    let p00r = integrated_population(&times, &traj.population(layout.index(0, 0, &[atom::r]))).map_err(|e| e.to_string())?;
    let want00 = 0.5 * one_plus_j0_pi() * t;
    let ok00 = rel(p00r, want00) <= TOL_00R;
    d.push(format!("∫P_00r dt / T = {:.8} vs ½(1+J0(π)) = {:.8}, rel {:.1e} (tol {TOL_00R:.0e}) {}", p00r / t, want00 / t, rel(p00r, want00), mark(ok00)));

    let dark = adiabatic_trajectory(&c, DarkSector::Single, &times).map_err(|e| e.to_string())?;
    let idx = Layout::new(1, 3).index(0, 2, &[atom::R]);
    let p02R = integrated_population(&times, &dark.population(idx)).map_err(|e| e.to_string())?;
    let want02 = zeta(v_dd() * t).map_err(|e| e.to_string())? * t;
    let ok02 = rel(p02R, want02) <= TOL_02R;
    d.push(format!("∫P_02R dt / T = {:.8} vs ζ(10π) = {:.8}, rel {:.1e} (tol {TOL_02R:.0e}) {}", p02R / t, want02 / t, rel(p02R, want02), mark(ok02)));

    let start = StateVector::basis(layout.dim(), layout.index(0, 1, &[atom::g])).map_err(|e| e.to_string())?;
    let traj = propagate(&h, &start, &times, &PropagationOptions::with_tol(1e-12)).map_err(|e| e.to_string())?;
    let p_sim = integrated_population(&times, &traj.population(layout.index(0, 2, &[atom::R]))).map_err(|e| e.to_string())?;
    d.push(format!("reference: Schrödinger ∫P_02R dt / T = {:.8} (rel {:.1e} to ζ)", p_sim / t, rel(p_sim, want02)));
    Ok(ok00 && ok02)
}

fn criterion_5(d: &mut Vec<String>) -> Outcome {
    const TARGET: f64 = 7.2e-4;
    const TOL: f64 = 0.1;
    let e = nnn_error(v_dd(), &NnnSpec::square_lattice(mhz(2.0)), 1.25e-6).map_err(|e| e.to_string())?;
    let ok = rel(e, TARGET) <= TOL;
    d.push(format!("eps_NNN {e:.4e} vs {TARGET:.1e}: {:+.1}% (tol {:.0}%) {}", (e / TARGET - 1.0) * 100.0, TOL * 100.0, mark(ok)));
    Ok(ok)
}

fn criterion_6(d: &mut Vec<String>) -> Outcome {
    const TOL: f64 = 0.03;
    const NA_QUOTED: f64 = 5.5e-4;
    // Half a unit in the last quoted digit.
    const NA_HALF_ULP: f64 = 0.05e-4;
    let v = v_dd();
    let t = 10.0 * PI / v;
    let c = caf(t);
    let (gr, gR) = (c.decay.gamma_r, c.decay.gamma_R);
    let full_decay = decay_error(gr, gR, v, t).map_err(|e| e.to_string())?;
    let simple_decay = simplified_decay(gr, gR, v);
    let ok_d = rel(simple_decay, full_decay) <= TOL;
    d.push(format!("decay: simplified {simple_decay:.5e} vs full {full_decay:.5e}, {:.2}% (tol {:.0}%) {}", rel(simple_decay, full_decay) * 100.0, TOL * 100.0, mark(ok_d)));
    let delta = mhz(0.0457);
    let full_det = detuning_error(delta, delta, v, t).map_err(|e| e.to_string())?.laser;
    let simple_det = simplified_detuning(delta, v);
    let ok_t = rel(simple_det, full_det) <= TOL;
    d.push(format!("detuning: simplified {simple_det:.5e} vs full laser term {full_det:.5e}, {:.2}% (tol {:.0}%) {}", rel(simple_det, full_det) * 100.0, TOL * 100.0, mark(ok_t)));
    let na = nonadiabatic_error(v, t).map_err(|e| e.to_string())?;
    let ok_na = (na - NA_QUOTED).abs() < NA_HALF_ULP;
    d.push(format!("NA at V T = 10π: {na:.5e} = 9π²/160000; quoted {NA_QUOTED:.1e} needs |diff| < {NA_HALF_ULP:.0e} {}", mark(ok_na)));
    Ok(ok_d && ok_t && ok_na)
}

fn criterion_7(d: &mut Vec<String>) -> Outcome {
    const LIMIT: f64 = 1e-2;
    const SIM_FACTOR: f64 = 3.0;
    let v = 2.0 * mhz(9.5);
    let (gr, gR) = (1.0 / 97e-6, 1.0 / 126e-6);
    let (t1_2, t2_2) = (0.3e-6, 0.3e-6);
    let (t1_3, t2_3) = (0.3e-6, 0.1e-6);
    // User calibration point at x₀ = 18 μm: V_rR = 2π×100 MHz, V_rr = 2π×4 kHz.
    let x0 = 18e-6;
    let (c3, c6) = DistanceScanSpec::calibrate(x0, mhz(100.0), mhz(0.004)).map_err(|e| e.to_string())?;
    let spec = DistanceScanSpec { c3_rR: c3, c6_rr: c6, x_values: vec![x0], t1: t1_3, t2: t2_3, v_dd_fixed: v, gamma_r: gr, gamma_R: gR };
    d.push(format!("calibration x0 = 18 um: V_rR = 2π×100 MHz, V_rr = 2π×4 kHz (C3 = 2π×{:.3e} MHz um^3, C6 = 2π×{:.3e} MHz um^6)", c3 / mhz(1.0) * 1e18, c6 / mhz(1.0) * 1e36));

    let two = two_atom_budget(gr, gR, v, spec.v_rr(10e-6), t1_2, t2_2).map_err(|e| e.to_string())?;
    let ok_two = two.total < LIMIT;
    d.push(format!("two-atom at 10 um: total {:.3e} (blockade {:.3e}) want < {LIMIT:.0e} {}", two.total, two.blockade, mark(ok_two)));

    let mut worst: (f64, f64) = (0.0, 0.0);
    for k in 0..=26 {
        let x = (12.0 + 0.5 * k as f64) * 1e-6;
        let b = three_atom_budget(gr, gR, v, spec.v_rR(x), spec.v_rr(x), t1_3, t2_3).map_err(|e| e.to_string())?;
        if b.total > worst.1 {
            worst = (x, b.total);
        }
    }
    let ok_three = worst.1 < LIMIT;
    d.push(format!("three-atom over [12, 25] um: max total {:.3e} at {:.1} um, want < {LIMIT:.0e} {}", worst.1, worst.0 * 1e6, mark(ok_three)));

    // Any single x⁻⁶ law: the two-atom claim needs V_rr(10) above `need`, the three-atom claim at 12 μm caps it.
    let rest2 = two.decay + two.non_adiabatic;
    let need = PI * PI / (t2_2 * (2.0 * (LIMIT - rest2)).sqrt());
    let at12 = three_atom_budget(gr, gR, v, spec.v_rR(12e-6), 0.0, t1_3, t2_3).map_err(|e| e.to_string())?;
    let cap12 = ((LIMIT - at12.total) / (3.0 / 16.0 * (t1_3 + t2_3).powi(2))).sqrt();
    let cap10 = cap12 * (12.0f64 / 10.0).powi(6);
    d.push(format!(
        "feasibility: two-atom needs V_rr(10 um) >= 2π×{:.3} MHz; three-atom at 12 um allows V_rr(10 um) <= 2π×{:.3} MHz",
        need / mhz(1.0),
        cap10 / mhz(1.0)
    ));

    let x_mid = 18.5e-6;
    let (v_rR, v_rr) = (spec.v_rR(x_mid), spec.v_rr(x_mid));
    let mut cfg = GateConfig::caf_default();
    cfg.coupling = CouplingSpec::symmetric(v);
    cfg.include_decay = true;
    let p = ProtocolSpec::three_atom(t1_3, t2_3, v_rr, v_rR).map_err(|e| e.to_string())?;
    let sim = run_cz_three_atom(&cfg, &p, &opts()).map_err(|e| e.to_string())?;
    let analytic = three_atom_budget(gr, gR, v, v_rR, v_rr, t1_3, t2_3).map_err(|e| e.to_string())?.total;
    let ok_sim = sim.target == TargetKind::U3 && sim.superposition_error < SIM_FACTOR * analytic;
    d.push(format!(
        "three-atom simulation at {:.1} um: target {:?}, phases {:?}, error {:.3e} vs {SIM_FACTOR}× analytic {:.3e} {}",
        x_mid * 1e6,
        sim.target,
        sim.acquired_phases.map(|p| (p * 1e3).round() / 1e3),
        sim.superposition_error,
        SIM_FACTOR * analytic,
        mark(ok_sim)
    ));
    Ok(ok_two && ok_three && ok_sim)
}

fn criterion_8(d: &mut Vec<String>) -> Outcome {
    const TARGET: f64 = 2e-4;
    const FACTOR: f64 = 2.0;
    const EXPONENT: f64 = 0.5;
    const EXPONENT_TOL: f64 = 0.15;
    const MAX_DNBAR: f64 = 1e-3;
    const MAX_PERTURBATION: f64 = 1e-4;
    let c = GateConfig::caf_default();
    let spec = MotionSpec::caf_default(&c, 1.0);
    d.push(format!("omega_m = 2π×100 kHz, a0 = {:.1} nm, n_max = {}", spec.a0 * 1e9, spec.n_max));
    let scan = run_motion_sqrt_scan(&c, &spec, &[0.25, 0.5, 1.0, 2.0]).map_err(|e| e.to_string())?;
    let at1 = scan.results.iter().find(|r| r.nbar == 1.0).expect("grid holds n̄ = 1");
    let ok_eps = at1.eps_motion >= TARGET / FACTOR && at1.eps_motion <= TARGET * FACTOR;
    d.push(format!("eps_motion(n̄=1) {:.3e} (want {TARGET:.0e} within ×{FACTOR}) {}", at1.eps_motion, mark(ok_eps)));
    let ok_exp = (scan.exponent - EXPONENT).abs() <= EXPONENT_TOL;
    d.push(format!("n̄ exponent {:.3} over n̄ = 0.25..2 (want {EXPONENT} ± {EXPONENT_TOL}) {}", scan.exponent, mark(ok_exp)));
    let worst_dn = scan.results.iter().map(|r| r.delta_nbar.abs()).fold(0.0, f64::max);
    let ok_dn = worst_dn < MAX_DNBAR;
    d.push(format!("max |Δn̄| {worst_dn:.3e} (want < {MAX_DNBAR:.0e}) {}", mark(ok_dn)));

    let x0 = c.geometry.x_am;
    let dx = 0.1e-6;
    let w = spec.omega_m;
    let cases: [(&str, Displacement); 4] = [
        ("static +0.1 um both", Arc::new(move |_| (x0 + dx, x0 + dx))),
        ("static -0.1 um both", Arc::new(move |_| (x0 - dx, x0 - dx))),
        ("static breathing", Arc::new(move |_| (x0 + dx, x0 - dx))),
        ("oscillating 0.1 um", Arc::new(move |t| (x0 + dx * (w * t).sin(), x0 + dx * (w * t).sin()))),
    ];
    let mut ok_pert = true;
    for (name, disp) in cases {
        let e = run_position_perturbation(&c, disp).map_err(|e| e.to_string())?;
        let ok = e < MAX_PERTURBATION;
        ok_pert &= ok;
        d.push(format!("{name}: added error {e:+.3e} (want < {MAX_PERTURBATION:.0e}) {}", mark(ok)));
    }
    Ok(ok_eps && ok_exp && ok_dn && ok_pert)
}

fn criterion_9(d: &mut Vec<String>) -> Outcome {
    const MIN: f64 = 0.9999;
    let s = StirapSpec::default();
    let r = run_readout_stirap(&GateConfig::caf_default(), &s, &opts()).map_err(|e| e.to_string())?;
    d.push(format!(
        "defaults: Ω1 = Ω2 = 2π×{:.3} MHz, width {:.0} us, delay {:.0} us",
        s.omega1_max / mhz(1.0),
        s.width * 1e6,
        s.delay * 1e6
    ));
    let ok0 = r.p_transfer_given_0 > MIN;
    let ok1 = r.p_stay_given_1 > MIN;
    d.push(format!("P(transfer | 0) {:.7} (want > {MIN}) {}", r.p_transfer_given_0, mark(ok0)));
    d.push(format!("P(stay | 1) {:.7} (want > {MIN}) {}", r.p_stay_given_1, mark(ok1)));
    Ok(ok0 && ok1)
}

fn criterion_10(d: &mut Vec<String>) -> Outcome {
    const LIMIT: f64 = 1e-3;
    const DX_OVER_X: f64 = 0.2;
    let anchors = ScalingAnchors::caf();
    let dm = 2.0 * DEBYE;
    let band: Vec<f64> = (0..=36).map(|k| (5.0 + 0.25 * k as f64) * 1e9).collect();
    let rows = error_vs_frequency_curve(&anchors, &band, dm, Environment::Room, DX_OVER_X).map_err(|e| e.to_string())?;
    let over: Vec<&_> = rows.iter().filter(|r| r.optimum.total >= LIMIT || r.optimum.total.is_nan()).collect();
    let ok_band = over.is_empty();
    let worst = rows.iter().map(|r| r.optimum.total).fold(0.0, f64::max);
    d.push(format!("eps_opt over [5, 14] GHz: max {worst:.3e} (want < {LIMIT:.0e}) {}", mark(ok_band)));
    if let (Some(first), Some(last)) = (over.first(), over.last()) {
        d.push(format!("above the limit from {:.2} to {:.2} GHz", first.f / 1e9, last.f / 1e9));
    }
    for f in [5.0, 8.0, 11.0, 14.0] {
        if let Some(r) = rows.iter().find(|r| (r.f / 1e9 - f).abs() < 1e-9) {
            let o = &r.optimum;
            d.push(format!("f = {f:>4} GHz: T_opt {:.3} us, eps {:.3e} (decay {:.2e}, NA {:.2e}, vdW {:.2e})", o.t * 1e6, o.total, o.decay, o.non_adiabatic, o.vdw));
        }
    }
    let wide: Vec<f64> = (0..=58).map(|k| (1.0 + 0.5 * k as f64) * 1e9).collect();
    let rows = error_vs_frequency_curve(&anchors, &wide, dm, Environment::Room, DX_OVER_X).map_err(|e| e.to_string())?;
    let ok_mono = rows.windows(2).all(|w| w[1].optimum.t > w[0].optimum.t);
    d.push(format!("T_opt strictly increasing over [1, 30] GHz {}", mark(ok_mono)));
    let low: Vec<_> = rows.iter().filter(|r| r.f < 3e9).collect();
    let ok_vdw = low.iter().all(|r| r.optimum.vdw > r.optimum.decay && r.optimum.vdw > r.optimum.non_adiabatic);
    d.push(format!("vdW is the largest term at all {} grid points below 3 GHz {}", low.len(), mark(ok_vdw)));
    Ok(ok_band && ok_mono && ok_vdw)
}

fn criterion_11(d: &mut Vec<String>) -> Outcome {
    let previous = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut all = true;
    for (name, prop) in invariants::SUITE {
        let ok = catch_unwind(*prop).is_ok();
        all &= ok;
        d.push(format!("{name}: {}", mark(ok)));
    }
    std::panic::set_hook(previous);
    d.push("each property runs 128 randomized cases".to_string());
    Ok(all)
}

fn main() {
    let mut report = Report { failures: 0 };
    report.run(1, "single-atom gate reproduction", criterion_1);
    report.run(2, "decay budget and Lindblad agreement", criterion_2);
    report.run(3, "non-adiabatic formula vs simulation", criterion_3);
    report.run(4, "integrated Rydberg populations", criterion_4);
    report.run(5, "next-nearest-neighbour error", criterion_5);
    report.run(6, "simplified budget forms", criterion_6);
    report.run(7, "long-range two- and three-atom gates", criterion_7);
    report.run(8, "thermal motion and position perturbations", criterion_8);
    report.run(9, "STIRAP readout", criterion_9);
    report.run(10, "error vs rotational frequency", criterion_10);
    report.run(11, "randomized invariant suites", criterion_11);
    println!("acceptance: {} of 11 criteria failed", report.failures);
    if report.failures > 0 {
        std::process::exit(1);
    }
}
