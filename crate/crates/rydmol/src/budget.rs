//! Closed-form gate-error terms for the single-atom gate and the two- and three-atom
//! long-range gates, plus the simplified expressions valid at `V_dd T = 10π`.
//!
//! All inputs are SI with angular frequencies in rad/s; every term is dimensionless.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::constants::{EPSILON_0, HBAR};
use crate::error::{invalid, Result};
use crate::model::GateConfig;

/// Bessel function `J₀(x)` from its power series (full double precision for `|x| ≤ 20`).
pub fn bessel_j0(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `1 + J₀(π)`, the recurring factor of the sine pulse: `∫p_00r dt = ½(1+J₀(π))T`.
pub fn one_plus_j0_pi() -> f64 {
    1.0 + bessel_j0(PI)
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(())
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(invalid(format!("{name} must be non-negative and finite, got {x}")));
    }
    Ok(())
}

/// `ζ(x) = 1 − 1/√(1 + (π²/x)²)`: integrated dark-state Rydberg population over `T`.
pub fn zeta(x: f64) -> Result<f64> {
    positive("zeta argument", x)?;
    let r = PI * PI / x;
    // 1 - 1/sqrt(1+r²) written to avoid cancellation at large x.
    let s = (1.0 + r * r).sqrt();
    Ok(r * r / (s * (s + 1.0)))
}

/// Decay error `⅛(1+J₀(π))Γ_r T + ¼(2ζ(VT) + ζ(√2 VT))Γ_R T`.
pub fn decay_error(gamma_r: f64, gamma_R: f64, v_dd: f64, t: f64) -> Result<f64> {
    non_negative("gamma_r", gamma_r)?;
    non_negative("gamma_R", gamma_R)?;
    positive("v_dd", v_dd)?;
    positive("T", t)?;
    let x = v_dd * t;
    Ok(one_plus_j0_pi() / 8.0 * gamma_r * t + 0.25 * (2.0 * zeta(x)? + zeta(2f64.sqrt() * x)?) * gamma_R * t)
}

/// Non-adiabatic error `9π⁶/(16 V⁴T⁴)`.
pub fn nonadiabatic_error(v_dd: f64, t: f64) -> Result<f64> {
    positive("v_dd", v_dd)?;
    positive("T", t)?;
    Ok(9.0 * PI.powi(6) / (16.0 * (v_dd * t).powi(4)))
}

/// The two detuning contributions, reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetuningError {
    /// `3/64 (1+J₀(π))² Δ_L² T²`
    pub laser: f64,
    /// `(¼ζ(VT)² + 3/16 ζ(√2VT)²)(Δ_AM − Δ_L)² T²`
    pub transition: f64,
}

impl DetuningError {
    pub fn total(&self) -> f64 {
        self.laser + self.transition
    }
}

/// Detuning error (an upper limit, since correlated phase errors partly cancel).
pub fn detuning_error(delta_l: f64, delta_am: f64, v_dd: f64, t: f64) -> Result<DetuningError> {
    positive("v_dd", v_dd)?;
    positive("T", t)?;
    if !delta_l.is_finite() || !delta_am.is_finite() {
        return Err(invalid("detunings must be finite"));
    }
    let j = one_plus_j0_pi();
    let x = v_dd * t;
    let laser = 3.0 / 64.0 * j * j * delta_l * delta_l * t * t;
    let z1 = zeta(x)?;
    let z2 = zeta(2f64.sqrt() * x)?;
    let d = delta_am - delta_l;
    let transition = (0.25 * z1 * z1 + 3.0 / 16.0 * z2 * z2) * d * d * t * t;
    Ok(DetuningError { laser, transition })
}

/// Error from an uncompensated static energy shift `δ` on the excited pair states,
/// evaluated with the laser-detuning form `3/64 (1+J₀(π))² δ² T²`.
pub fn shift_error(shift: f64, t: f64) -> Result<f64> {
    Ok(detuning_error(shift, shift, 1.0, t)?.laser)
}

/// van der Waals dephasing error `27V⁴/(256 E²) (δx/x)² (1+J₀(π))² T²`.
pub fn vdw_error(v_dd: f64, e_ryd: f64, dx_over_x: f64, t: f64) -> Result<f64> {
    non_negative("v_dd", v_dd)?;
    positive("e_ryd", e_ryd)?;
    non_negative("dx_over_x", dx_over_x)?;
    positive("T", t)?;
    let j = one_plus_j0_pi();
    Ok(27.0 * v_dd.powi(4) / (256.0 * e_ryd * e_ryd) * dx_over_x * dx_over_x * j * j * t * t)
}

/// Next-nearest-neighbour detuning and lattice geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NnnSpec {
    /// `Δ_NNN` in rad/s.
    pub delta_nnn: f64,
    /// `V_dd / V_NNN`; `5^{3/2}` for a square array with the atom between nearest neighbours.
    pub geometry_factor: f64,
}

impl NnnSpec {
    pub fn square_lattice(delta_nnn: f64) -> Self {
        Self { delta_nnn, geometry_factor: 5f64.powf(1.5) }
    }

    /// Lower edge of the detuning range over which the perturbative model was checked.
    pub const VALIDATED_MIN_DELTA: f64 = 2.0 * PI * 2.0e6;

    pub fn within_validated_range(&self) -> bool {
        self.delta_nnn >= Self::VALIDATED_MIN_DELTA * (1.0 - 1e-12)
    }

    pub fn v_nnn(&self, v_dd: f64) -> f64 {
        v_dd / self.geometry_factor
    }
}

/// NNN error `3/32 (1+J₀(π))² δ² T²` with `δ = V_NNN²/(4Δ_NNN)`.
pub fn nnn_error(v_dd: f64, spec: &NnnSpec, t: f64) -> Result<f64> {
    non_negative("v_dd", v_dd)?;
    positive("delta_nnn", spec.delta_nnn)?;
    positive("geometry_factor", spec.geometry_factor)?;
    positive("T", t)?;
    let v = spec.v_nnn(v_dd);
    let delta = v * v / (4.0 * spec.delta_nnn);
    let j = one_plus_j0_pi();
    Ok(3.0 / 32.0 * j * j * delta * delta * t * t)
}

/// Inputs of the field-induced atom-molecule interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldInducedSpec {
    /// Molecule-frame dipole `μ₀` in C·m.
    pub mu0: f64,
    /// Rydberg Stark shift over rotational constant, `ΔW_r/B`.
    pub stark_ratio: f64,
    pub x_am: f64,
}

/// `V_r1 = μ₀²/(6πε₀x³) · ΔW_r/B`, as an angular frequency.
pub fn field_induced_shift(spec: &FieldInducedSpec) -> Result<f64> {
    positive("mu0", spec.mu0)?;
    non_negative("stark_ratio", spec.stark_ratio)?;
    positive("x_am", spec.x_am)?;
    Ok(spec.mu0 * spec.mu0 / (6.0 * PI * EPSILON_0 * spec.x_am.powi(3)) * spec.stark_ratio / HBAR)
}

/// Static dipole-dipole shift `d²/(4πε₀r³)` between two molecules, as an angular frequency.
pub fn molecule_molecule_shift(d_m: f64, separation: f64) -> Result<f64> {
    positive("d_m", d_m)?;
    positive("separation", separation)?;
    Ok(d_m * d_m / (4.0 * PI * EPSILON_0 * separation.powi(3)) / HBAR)
}

/// Simplified decay error at `V_dd T = 10π`.
pub fn simplified_decay(gamma_r: f64, gamma_R: f64, v_dd: f64) -> f64 {
    (2.7 * gamma_r + 0.9 * gamma_R) / v_dd
}

/// Simplified laser-detuning error at `V_dd T = 10π`.
pub fn simplified_detuning(delta: f64, v_dd: f64) -> f64 {
    22.4 * delta * delta / (v_dd * v_dd)
}

/// Simplified NNN error at `V_dd T = 10π` and the square-lattice factor.
pub fn simplified_nnn(v_dd: f64, delta_nnn: f64) -> f64 {
    1.8e-4 * v_dd * v_dd / (delta_nnn * delta_nnn)
}

/// Tabulated simplified vdW form `0.52 V²/E²`, i.e. `13 (V/E)² (δx/x)²` at `δx/x = 0.2`.
/// The closed form [`vdw_error`] evaluated at `V T = 10π` gives `≈50 (V/E)² (δx/x)²`
/// instead; budgets always use the closed form.
pub fn simplified_vdw(v_dd: f64, e_ryd: f64) -> f64 {
    0.52 * v_dd * v_dd / (e_ryd * e_ryd)
}

/// Scaling of a term with rotational frequency `f` and molecular dipole `d_M` when the
/// gate time keeps `V_dd T` fixed: `ε ∝ f^f_exponent · d_M^d_exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermScaling {
    pub f_exponent: f64,
    pub d_exponent: f64,
}

pub const DECAY_SCALING: TermScaling = TermScaling { f_exponent: 1.5, d_exponent: -1.0 };
pub const NON_ADIABATIC_SCALING: TermScaling = TermScaling { f_exponent: 0.0, d_exponent: 0.0 };
pub const VDW_SCALING: TermScaling = TermScaling { f_exponent: -10.0 / 3.0, d_exponent: 2.0 };
/// Assumes the detuning comes from field noise at fixed fractional stability, so `Δ ∝ f`.
pub const DETUNING_SCALING: TermScaling = TermScaling { f_exponent: 10.0 / 3.0, d_exponent: -2.0 };
pub const NNN_SCALING: TermScaling = TermScaling { f_exponent: -4.0 / 3.0, d_exponent: 2.0 };
pub const MOLECULE_MOLECULE_SCALING: TermScaling = TermScaling { f_exponent: 0.0, d_exponent: 2.0 };
pub const FIELD_INDUCED_SCALING: TermScaling = TermScaling { f_exponent: -2.0 / 3.0, d_exponent: 2.0 };

/// Optional contributions beyond what a [`GateConfig`] carries.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BudgetExtras {
    /// Rydberg level spacing `E_ryd` (rad/s); the vdW term is skipped when absent.
    pub e_ryd: Option<f64>,
    /// Externally computed vdW error that replaces the closed form.
    pub vdw_override: Option<f64>,
    pub nnn: Option<NnnSpec>,
    /// Molecular dipole and molecule-molecule separation.
    pub molecule_molecule: Option<(f64, f64)>,
    pub field_induced: Option<FieldInducedSpec>,
    /// Count the `(Δ_AM − Δ_L)` detuning term in the total.
    pub include_transition_detuning: bool,
}

/// Inputs echoed alongside the budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetInputs {
    pub gamma_r: f64,
    pub gamma_R: f64,
    pub v_dd: f64,
    pub T: f64,
    pub delta_l: f64,
    pub delta_am: f64,
    pub dx_over_x: f64,
    pub extras: BudgetExtras,
}

/// One itemized term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetTerm {
    pub name: &'static str,
    pub value: f64,
    pub included: bool,
    pub scaling: Option<TermScaling>,
}

/// Itemized single-atom gate error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub decay: f64,
    pub non_adiabatic: f64,
    pub detuning: DetuningError,
    pub vdw: f64,
    pub nnn: f64,
    pub molecule_molecule: f64,
    pub field_induced: f64,
    pub total: f64,
    pub terms: Vec<BudgetTerm>,
    pub inputs: BudgetInputs,
    pub notes: Vec<String>,
}

impl ErrorBudget {
    /// Writes `term,value` rows (all terms, then `total`).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "term,value")?;
        for t in &self.terms {
            writeln!(w, "{},{:.11e}", t.name, t.value)?;
        }
        writeln!(w, "total,{:.11e}", self.total)?;
        Ok(())
    }
}

/// Itemized budget for the single-atom gate described by `config`.
pub fn full_budget(config: &GateConfig, extras: &BudgetExtras) -> Result<ErrorBudget> {
    config.validate()?;
    let v_dd = config
        .coupling
        .v_dd()
        .ok_or_else(|| invalid("the analytic budget assumes V_1A = V_2A"))?
        .abs();
    let t = config.pulse.duration;
    let dx_over_x = config.geometry.delta_x / config.geometry.x_am;
    let mut notes = Vec::new();

    let decay = decay_error(config.decay.gamma_r, config.decay.gamma_R, v_dd, t)?;
    let non_adiabatic = nonadiabatic_error(v_dd, t)?;
    let detuning = detuning_error(config.detuning.delta_l, config.detuning.delta_am, v_dd, t)?;
    let vdw = match (extras.vdw_override, extras.e_ryd) {
        (Some(v), _) => {
            non_negative("vdw_override", v)?;
            notes.push("vdw: externally supplied value".to_string());
            v
        }
        (None, Some(e)) => vdw_error(v_dd, e, dx_over_x, t)?,
        (None, None) => 0.0,
    };
    let nnn = match &extras.nnn {
        Some(spec) => {
            if !spec.within_validated_range() {
                notes.push("nnn: delta_nnn is below 2pi x 2 MHz, where the perturbative model is unverified".to_string());
            }
            nnn_error(v_dd, spec, t)?
        }
        None => 0.0,
    };
    let molecule_molecule = match extras.molecule_molecule {
        Some((d, r)) => shift_error(molecule_molecule_shift(d, r)?, t)?,
        None => 0.0,
    };
    let field_induced = match &extras.field_induced {
        Some(spec) => shift_error(field_induced_shift(spec)?, t)?,
        None => 0.0,
    };
    if !extras.include_transition_detuning && detuning.transition > 0.0 {
        notes.push("detuning: transition term reported but excluded from the total".to_string());
    }
    let terms = vec![
        BudgetTerm { name: "decay", value: decay, included: true, scaling: Some(DECAY_SCALING) },
        BudgetTerm { name: "non_adiabatic", value: non_adiabatic, included: true, scaling: Some(NON_ADIABATIC_SCALING) },
        BudgetTerm { name: "vdw", value: vdw, included: true, scaling: Some(VDW_SCALING) },
        BudgetTerm { name: "detuning_laser", value: detuning.laser, included: true, scaling: Some(DETUNING_SCALING) },
        BudgetTerm {
            name: "detuning_transition",
            value: detuning.transition,
            included: extras.include_transition_detuning,
            scaling: Some(DETUNING_SCALING),
        },
        BudgetTerm { name: "nnn", value: nnn, included: true, scaling: Some(NNN_SCALING) },
        BudgetTerm { name: "molecule_molecule", value: molecule_molecule, included: true, scaling: Some(MOLECULE_MOLECULE_SCALING) },
        BudgetTerm { name: "field_induced", value: field_induced, included: true, scaling: Some(FIELD_INDUCED_SCALING) },
    ];
    let total = terms.iter().filter(|t| t.included).map(|t| t.value).sum();
    Ok(ErrorBudget {
        decay,
        non_adiabatic,
        detuning,
        vdw,
        nnn,
        molecule_molecule,
        field_induced,
        total,
        terms,
        inputs: BudgetInputs {
            gamma_r: config.decay.gamma_r,
            gamma_R: config.decay.gamma_R,
            v_dd,
            T: t,
            delta_l: config.detuning.delta_l,
            delta_am: config.detuning.delta_am,
            dx_over_x,
            extras: extras.clone(),
        },
        notes,
    })
}

/// Two-atom long-range gate budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoAtomBudget {
    pub decay: f64,
    pub non_adiabatic: f64,
    pub blockade: f64,
    pub total: f64,
}

/// `ε_Γ2`, `ε_NA2 = π⁶/(4V⁴T₁⁴) + π⁶/(2V⁴T₂⁴)` and `ε_B2 = π⁴/(2V_rr²T₂²)`.
/// An infinite `v_rr` gives a zero blockade term.
pub fn two_atom_budget(gamma_r: f64, gamma_R: f64, v_dd: f64, v_rr: f64, t1: f64, t2: f64) -> Result<TwoAtomBudget> {
    non_negative("gamma_r", gamma_r)?;
    non_negative("gamma_R", gamma_R)?;
    positive("v_dd", v_dd)?;
    positive("T1", t1)?;
    positive("T2", t2)?;
    if !(v_rr > 0.0) {
        return Err(invalid(format!("v_rr must be positive, got {v_rr}")));
    }
    let j = one_plus_j0_pi();
    let decay = ((t1 + t2) / 2.0 + j / 8.0 * t2) * gamma_r
        + (0.5 * zeta(2.0 * v_dd * t1)? * t1 + 0.25 * zeta(v_dd * t2)? * t2) * gamma_R;
    let p6 = PI.powi(6);
    let non_adiabatic = p6 / (4.0 * (v_dd * t1).powi(4)) + p6 / (2.0 * (v_dd * t2).powi(4));
    let blockade = if v_rr.is_infinite() { 0.0 } else { PI.powi(4) / (2.0 * (v_rr * t2).powi(2)) };
    Ok(TwoAtomBudget { decay, non_adiabatic, blockade, total: decay + non_adiabatic + blockade })
}

/// Three-atom long-range gate budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeAtomBudget {
    pub decay: f64,
    pub non_adiabatic: f64,
    pub outer_interaction: f64,
    pub total: f64,
}

/// `ε_Γ3`, `ε_NA3 = π⁶/(2V⁴T₁⁴) + 9π⁶/(16V_rR⁴T₂⁴)` and `ε_I3 = 3/16 (T₁+T₂)² V_rr²`.
pub fn three_atom_budget(gamma_r: f64, gamma_R: f64, v_dd: f64, v_rR: f64, v_rr: f64, t1: f64, t2: f64) -> Result<ThreeAtomBudget> {
    non_negative("gamma_r", gamma_r)?;
    non_negative("gamma_R", gamma_R)?;
    positive("v_dd", v_dd)?;
    positive("v_rR", v_rR)?;
    non_negative("v_rr", v_rr)?;
    positive("T1", t1)?;
    positive("T2", t2)?;
    let j = one_plus_j0_pi();
    let x = v_rR * t2;
    let decay = (t1 + t2 + 0.5 * zeta(x)? * t2 + 0.25 * zeta(2f64.sqrt() * x)? * t2) * gamma_r
        + (zeta(2.0 * v_dd * t1)? * t1 + j / 8.0 * t2) * gamma_R;
    let p6 = PI.powi(6);
    let non_adiabatic = p6 / (2.0 * (v_dd * t1).powi(4)) + 9.0 * p6 / (16.0 * x.powi(4));
    let outer_interaction = 3.0 / 16.0 * (t1 + t2).powi(2) * v_rr * v_rr;
    Ok(ThreeAtomBudget { decay, non_adiabatic, outer_interaction, total: decay + non_adiabatic + outer_interaction })
}
