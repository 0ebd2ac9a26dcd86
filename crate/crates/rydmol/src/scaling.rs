//! Anchored power-law scaling of the gate parameters with rotational frequency `f` and
//! molecular dipole `d_M`, gate-time optimization, and long-range error-vs-distance tables.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{decay_error, nonadiabatic_error, three_atom_budget, two_atom_budget, vdw_error};
use crate::constants::{ghz, mhz, DEBYE};
use crate::error::{invalid, Boundary, Error, Result};
use crate::model::ProtocolKind;

/// Black-body environment setting the Rydberg lifetime scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Environment {
    /// `Γ ∝ n^(−5/2)`
    #[serde(rename = "300K")]
    Room,
    /// `Γ ∝ n^(−3)`
    #[serde(rename = "0K")]
    Zero,
}

/// Reference point of the power-law model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingAnchors {
    /// Rotational frequency (Hz).
    pub f0: f64,
    pub n0: f64,
    pub v_dd0: f64,
    /// Dipole moment (C·m) at which `v_dd0` holds.
    pub d_m0: f64,
    /// Rydberg decay rates at 300 K.
    pub gamma_r0: f64,
    pub gamma_R0: f64,
    /// Rydberg decay rates at 0 K.
    pub gamma_r0_zero_k: f64,
    pub gamma_R0_zero_k: f64,
    pub e_ryd0: f64,
}

impl ScalingAnchors {
    /// CaF with a Rydberg pair near `n = 59`: `f₀ = 20.5 GHz`, `V_dd = 2·2π×2.02 MHz` at 3.07 D,
    /// lifetimes 97/126 μs at 300 K and 187/499 μs at 0 K, `E_ryd = 2π×3 GHz`.
    pub fn caf() -> Self {
        Self {
            f0: 20.5e9,
            n0: 59.0,
            v_dd0: 2.0 * mhz(2.02),
            d_m0: 3.07 * DEBYE,
            gamma_r0: 1.0 / 97e-6,
            gamma_R0: 1.0 / 126e-6,
            gamma_r0_zero_k: 1.0 / 187e-6,
            gamma_R0_zero_k: 1.0 / 499e-6,
            e_ryd0: ghz(3.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("f0", self.f0),
            ("n0", self.n0),
            ("v_dd0", self.v_dd0),
            ("d_m0", self.d_m0),
            ("gamma_r0", self.gamma_r0),
            ("gamma_R0", self.gamma_R0),
            ("gamma_r0_zero_k", self.gamma_r0_zero_k),
            ("gamma_R0_zero_k", self.gamma_R0_zero_k),
            ("e_ryd0", self.e_ryd0),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("anchor {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Principal quantum number matching `f`, from `f ∝ n⁻³`.
    pub fn n_at(&self, f: f64) -> f64 {
        self.n0 * (f / self.f0).powf(-1.0 / 3.0)
    }
}

/// Gate parameters at one `(f, d_M)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledParams {
    pub v_dd: f64,
    pub gamma_r: f64,
    pub gamma_R: f64,
    pub e_ryd: f64,
}

pub fn params_at(anchors: &ScalingAnchors, f: f64, d_m: f64, env: Environment) -> Result<ScaledParams> {
    anchors.validate()?;
    if !(f > 0.0) || !(d_m > 0.0) {
        return Err(invalid(format!("f and d_m must be positive, got {f} and {d_m}")));
    }
    let ratio = f / anchors.f0;
    let (gr, gR, p) = match env {
        Environment::Room => (anchors.gamma_r0, anchors.gamma_R0, 5.0 / 6.0),
        Environment::Zero => (anchors.gamma_r0_zero_k, anchors.gamma_R0_zero_k, 1.0),
    };
    let g = ratio.powf(p);
    Ok(ScaledParams {
        v_dd: anchors.v_dd0 * (d_m / anchors.d_m0) * ratio.powf(-2.0 / 3.0),
        gamma_r: gr * g,
        gamma_R: gR * g,
        e_ryd: anchors.e_ryd0 * ratio,
    })
}

/// Decay, non-adiabatic and van der Waals terms at gate time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateTimePoint {
    pub t: f64,
    pub decay: f64,
    pub non_adiabatic: f64,
    pub vdw: f64,
    pub total: f64,
}

pub fn evaluate_at(p: &ScaledParams, dx_over_x: f64, t: f64) -> Result<GateTimePoint> {
    let decay = decay_error(p.gamma_r, p.gamma_R, p.v_dd, t)?;
    let non_adiabatic = nonadiabatic_error(p.v_dd, t)?;
    let vdw = vdw_error(p.v_dd, p.e_ryd, dx_over_x, t)?;
    Ok(GateTimePoint { t, decay, non_adiabatic, vdw, total: decay + non_adiabatic + vdw })
}

/// Search bracket for the gate time (s).
pub const T_BRACKET: (f64, f64) = (1e-8, 1e-4);

/// Golden-section minimization of the total error over `ln T` within [`T_BRACKET`].
pub fn optimize_params(p: &ScaledParams, dx_over_x: f64) -> Result<GateTimePoint> {
    let eval = |u: f64| evaluate_at(p, dx_over_x, u.exp()).map(|g| g.total);
    let (lo, hi) = (T_BRACKET.0.ln(), T_BRACKET.1.ln());
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while b - a > 1e-9 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let u = 0.5 * (a + b);
    if u - lo < 1e-6 {
        return Err(Error::NoInteriorMinimum(Boundary::Lower));
    }
    if hi - u < 1e-6 {
        return Err(Error::NoInteriorMinimum(Boundary::Upper));
    }
    evaluate_at(p, dx_over_x, u.exp())
}

/// Optimal gate time and error at `(f, d_M)`.
pub fn optimize_gate_time(anchors: &ScalingAnchors, f: f64, d_m: f64, env: Environment, dx_over_x: f64) -> Result<GateTimePoint> {
    let p = params_at(anchors, f, d_m, env)?;
    optimize_params(&p, dx_over_x).map_err(|e| e.context(format!("f = {:.4} GHz", f / 1e9)))
}

/// One row of the optimized error-vs-frequency curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyRow {
    pub f: f64,
    pub optimum: GateTimePoint,
}

pub fn error_vs_frequency_curve(
    anchors: &ScalingAnchors,
    f_grid: &[f64],
    d_m: f64,
    env: Environment,
    dx_over_x: f64,
) -> Result<Vec<FrequencyRow>> {
    if f_grid.is_empty() || f_grid.iter().any(|&f| !(f > 0.0)) {
        return Err(invalid("frequency grid must be non-empty and positive"));
    }
    f_grid
        .par_iter()
        .map(|&f| Ok(FrequencyRow { f, optimum: optimize_gate_time(anchors, f, d_m, env, dx_over_x)? }))
        .collect()
}

pub fn write_frequency_csv<W: Write>(rows: &[FrequencyRow], mut w: W) -> Result<()> {
    writeln!(w, "f_GHz,T_opt_us,eps_total,eps_decay,eps_NA,eps_vdW")?;
    for r in rows {
        let o = &r.optimum;
        writeln!(w, "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}", r.f / 1e9, o.t * 1e6, o.total, o.decay, o.non_adiabatic, o.vdw)?;
    }
    Ok(())
}

/// Inputs for the long-range error-vs-distance tables; `V_rR = c3/x³`, `V_rr = c6/x⁶`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceScanSpec {
    pub c3_rR: f64,
    pub c6_rr: f64,
    /// Atom–atom distances (m), strictly increasing.
    pub x_values: Vec<f64>,
    pub t1: f64,
    pub t2: f64,
    pub v_dd_fixed: f64,
    pub gamma_r: f64,
    pub gamma_R: f64,
}

impl DistanceScanSpec {
    /// Coefficients fixed by one reference point `(x₀, V_rR(x₀), V_rr(x₀))`.
    pub fn calibrate(x0: f64, v_rR_x0: f64, v_rr_x0: f64) -> Result<(f64, f64)> {
        if !(x0 > 0.0) || !(v_rR_x0 > 0.0) || !(v_rr_x0 > 0.0) {
            return Err(invalid("calibration point must be positive"));
        }
        Ok((v_rR_x0 * x0.powi(3), v_rr_x0 * x0.powi(6)))
    }

    pub fn v_rR(&self, x: f64) -> f64 {
        self.c3_rR / x.powi(3)
    }

    pub fn v_rr(&self, x: f64) -> f64 {
        self.c6_rr / x.powi(6)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c3_rR > 0.0) || !(self.c6_rr > 0.0) {
            return Err(invalid("c3_rR and c6_rr must be positive"));
        }
        if self.x_values.is_empty() || self.x_values[0] <= 0.0 || self.x_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("x_values must be positive and strictly increasing"));
        }
        if !(self.t1 > 0.0) || !(self.t2 > 0.0) || !(self.v_dd_fixed > 0.0) {
            return Err(invalid("T1, T2 and v_dd_fixed must be positive"));
        }
        if self.gamma_r < 0.0 || self.gamma_R < 0.0 {
            return Err(invalid("decay rates must be non-negative"));
        }
        Ok(())
    }
}

/// Analytic long-range budget at one distance. `interaction` is the blockade term for the
/// two-atom protocol and the outer-atom interaction term for the three-atom protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceRow {
    pub x: f64,
    pub v_rr: f64,
    pub v_rR: f64,
    pub decay: f64,
    pub non_adiabatic: f64,
    pub interaction: f64,
    pub total: f64,
}

pub fn longrange_error_vs_distance(spec: &DistanceScanSpec, protocol: ProtocolKind) -> Result<Vec<DistanceRow>> {
    spec.validate()?;
    spec.x_values
        .par_iter()
        .map(|&x| {
            let (v_rr, v_rR) = (spec.v_rr(x), spec.v_rR(x));
            let (decay, non_adiabatic, interaction, total) = match protocol {
                ProtocolKind::CzTwoAtom => {
                    let b = two_atom_budget(spec.gamma_r, spec.gamma_R, spec.v_dd_fixed, v_rr, spec.t1, spec.t2)?;
                    (b.decay, b.non_adiabatic, b.blockade, b.total)
                }
                ProtocolKind::CzThreeAtom => {
                    let b = three_atom_budget(spec.gamma_r, spec.gamma_R, spec.v_dd_fixed, v_rR, v_rr, spec.t1, spec.t2)?;
                    (b.decay, b.non_adiabatic, b.outer_interaction, b.total)
                }
                k => return Err(invalid(format!("{k:?} is not a long-range protocol"))),
            };
            Ok(DistanceRow { x, v_rr, v_rR, decay, non_adiabatic, interaction, total })
        })
        .collect()
}

pub fn write_distance_csv<W: Write>(rows: &[DistanceRow], protocol: ProtocolKind, mut w: W) -> Result<()> {
    let last = if protocol == ProtocolKind::CzThreeAtom { "eps_outer" } else { "eps_blockade" };
    writeln!(w, "x_um,eps_total,eps_decay,eps_NA,{last}")?;
    for r in rows {
        writeln!(w, "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}", r.x * 1e6, r.total, r.decay, r.non_adiabatic, r.interaction)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::{DECAY_SCALING, VDW_SCALING};
    use approx::assert_relative_eq;

    #[test]
    fn anchors_round_trip() {
        let a = ScalingAnchors::caf();
        let p = params_at(&a, a.f0, a.d_m0, Environment::Room).unwrap();
        assert_relative_eq!(p.v_dd, a.v_dd0, max_relative = 1e-12);
        assert_relative_eq!(p.gamma_r, a.gamma_r0, max_relative = 1e-12);
        assert_relative_eq!(p.e_ryd, a.e_ryd0, max_relative = 1e-12);
        let p8 = params_at(&a, 8.0 * a.f0, a.d_m0, Environment::Room).unwrap();
        assert_relative_eq!(p8.e_ryd, 8.0 * a.e_ryd0, max_relative = 1e-12);
        assert_relative_eq!(p8.v_dd, a.v_dd0 / 4.0, max_relative = 1e-12);
        assert_relative_eq!(a.n_at(8.0 * a.f0), a.n0 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn doubling_dipole() {
        let a = ScalingAnchors::caf();
        let t = 1e-6;
        let p1 = params_at(&a, a.f0, a.d_m0, Environment::Room).unwrap();
        let p2 = params_at(&a, a.f0, 2.0 * a.d_m0, Environment::Room).unwrap();
        assert_relative_eq!(p2.v_dd, 2.0 * p1.v_dd, max_relative = 1e-12);
        let (e1, e2) = (evaluate_at(&p1, 0.2, t).unwrap(), evaluate_at(&p2, 0.2, t).unwrap());
        assert_relative_eq!(e2.vdw / e1.vdw, 16.0, max_relative = 1e-12);
        // At fixed V_dd T the decay term halves.
        let e2_fixed = evaluate_at(&p2, 0.2, t / 2.0).unwrap();
        assert_relative_eq!(e2_fixed.decay / e1.decay, 0.5, max_relative = 1e-12);
        assert_relative_eq!(e2_fixed.vdw / e1.vdw, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn scaling_metadata_matches_slopes() {
        let a = ScalingAnchors::caf();
        let at = |f: f64| {
            let p = params_at(&a, f, a.d_m0, Environment::Room).unwrap();
            evaluate_at(&p, 0.2, 10.0 * std::f64::consts::PI / p.v_dd).unwrap()
        };
        let (f1, f2): (f64, f64) = (10e9, 10.1e9);
        let slope = |g1: f64, g2: f64| (g2 / g1).ln() / (f2 / f1).ln();
        let (e1, e2) = (at(f1), at(f2));
        assert!((slope(e1.decay, e2.decay) - DECAY_SCALING.f_exponent).abs() < 0.05);
        assert!((slope(e1.vdw, e2.vdw) - VDW_SCALING.f_exponent).abs() < 0.05);
    }

    #[test]
    fn optimum_is_local_minimum() {
        let a = ScalingAnchors::caf();
        let o = optimize_gate_time(&a, a.f0, a.d_m0, Environment::Room, 0.2).unwrap();
        let p = params_at(&a, a.f0, a.d_m0, Environment::Room).unwrap();
        for s in [0.95, 1.05] {
            assert!(evaluate_at(&p, 0.2, o.t * s).unwrap().total > o.total);
        }
        let h = 1e-4 * o.t;
        let d = (evaluate_at(&p, 0.2, o.t + h).unwrap().total - evaluate_at(&p, 0.2, o.t - h).unwrap().total) / (2.0 * h);
        assert!((d * o.t / o.total).abs() < 1e-4);
    }

    #[test]
    fn no_interior_minimum_names_boundary() {
        let mut a = ScalingAnchors::caf();
        a.gamma_r0 = 1e-300;
        a.gamma_R0 = 1e-300;
        let e = optimize_gate_time(&a, a.f0, a.d_m0, Environment::Room, 0.0).unwrap_err();
        assert!(e.to_string().contains("upper"), "{e}");
    }

    #[test]
    fn calibration_and_distance_laws() {
        let (c3, c6) = DistanceScanSpec::calibrate(10e-6, 2.0, 3.0).unwrap();
        let spec = DistanceScanSpec {
            c3_rR: c3,
            c6_rr: c6,
            x_values: vec![5e-6, 10e-6, 20e-6],
            t1: 0.3e-6,
            t2: 0.3e-6,
            v_dd_fixed: 2.0 * mhz(9.5),
            gamma_r: 0.0,
            gamma_R: 0.0,
        };
        assert_relative_eq!(spec.v_rR(10e-6), 2.0, max_relative = 1e-12);
        assert_relative_eq!(spec.v_rr(20e-6), 3.0 / 64.0, max_relative = 1e-12);
        assert!(longrange_error_vs_distance(&spec, ProtocolKind::ReadoutStirap).is_err());
        let mut bad = spec.clone();
        bad.x_values = vec![2e-6, 1e-6];
        assert!(bad.validate().is_err());
    }
}
