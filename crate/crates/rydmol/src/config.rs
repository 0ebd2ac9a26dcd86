//! JSON run configuration.
//!
//! A document names one scenario, declares its units, and carries only the blocks that
//! scenario uses. Frequencies are ordinary frequencies in MHz (keys ending in `_MHz`) or
//! angular frequencies (the same key ending in `_rad_s`); times are in μs, lengths in μm and
//! dipoles in Debye. Parsing collects every violation before failing, and the normalized
//! document (with defaults filled in) is kept for echoing into outputs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::budget::{BudgetExtras, FieldInducedSpec, NnnSpec};
use crate::constants::{mhz, CAF_MASS, DEBYE};
use crate::error::{ConfigErrors, Error, Result, Violation};
use crate::gates::{GateOptions, PumpingSpec, StirapSpec};
use crate::model::{CouplingSpec, DecaySpec, DetuningSpec, GateConfig, GeometrySpec, ProtocolKind, ProtocolSpec, PulseSchedule};
use crate::motion::{oscillator_length, MotionSpec};
use crate::scaling::{DistanceScanSpec, Environment, ScalingAnchors};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Gate,
    Longrange,
    Budget,
    Optimize,
    ScanFrequency,
    ScanDistance,
    Motion,
    Readout,
    Init,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Gate,
        Scenario::Longrange,
        Scenario::Budget,
        Scenario::Optimize,
        Scenario::ScanFrequency,
        Scenario::ScanDistance,
        Scenario::Motion,
        Scenario::Readout,
        Scenario::Init,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Gate => "gate",
            Scenario::Longrange => "longrange",
            Scenario::Budget => "budget",
            Scenario::Optimize => "optimize",
            Scenario::ScanFrequency => "scan_frequency",
            Scenario::ScanDistance => "scan_distance",
            Scenario::Motion => "motion",
            Scenario::Readout => "readout",
            Scenario::Init => "init",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }

    /// Blocks this scenario requires and those it merely accepts.
    fn blocks(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Scenario::Gate => (&["gate"], &[]),
            Scenario::Longrange => (&["gate", "protocol"], &[]),
            Scenario::Budget => (&["gate"], &["budget"]),
            Scenario::Optimize | Scenario::ScanFrequency => (&["scaling"], &[]),
            Scenario::ScanDistance => (&["distance"], &[]),
            Scenario::Motion => (&["gate", "motion"], &[]),
            Scenario::Readout => (&["gate"], &["readout"]),
            Scenario::Init => (&["gate"], &["init"]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Expected `units` object.
pub const UNITS: [(&str, &str); 4] = [("frequency", "MHz"), ("time", "us"), ("length", "um"), ("dipole", "D")];

/// Scaling-model request for `optimize` and `scan_frequency`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRequest {
    pub anchors: ScalingAnchors,
    /// Rotational frequencies (Hz): one for `optimize`, the grid for `scan_frequency`.
    pub f: Vec<f64>,
    pub d_m: f64,
    pub environment: Environment,
    pub dx_over_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotionRequest {
    pub spec: MotionSpec,
    /// When present, an n̄ scan with exponent fit replaces the single thermal run.
    pub nbar_grid: Option<Vec<f64>>,
}

/// Validated run configuration in internal SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Input document with defaults filled in, in the user's units.
    pub normalized: Value,
    pub output_path: Option<String>,
    pub format: Format,
    pub solver: GateOptions,
    pub gate: Option<GateConfig>,
    pub protocol: Option<ProtocolSpec>,
    pub budget: Option<BudgetExtras>,
    pub scaling: Option<ScalingRequest>,
    pub distance: Option<(DistanceScanSpec, ProtocolKind)>,
    pub motion: Option<MotionRequest>,
    pub readout: Option<StirapSpec>,
    pub init: Option<PumpingSpec>,
}

impl RunConfig {
    /// Serializes the normalized document; parsing it again yields an identical config.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.normalized).expect("JSON values always serialize")
    }

    /// SHA-256 of the compact normalized document.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.normalized).expect("JSON values always serialize");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Default)]
struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.0.push(Violation { path: path.to_string(), message: message.into() });
    }
}

#[derive(Clone, Copy)]
enum Check {
    Any,
    NonNegative,
    Positive,
}

/// Reads one JSON object, tracking used keys and building the normalized copy.
struct Block<'a> {
    path: String,
    src: &'a Map<String, Value>,
    used: Vec<String>,
    out: Map<String, Value>,
}

impl<'a> Block<'a> {
    fn new(path: &str, src: &'a Map<String, Value>) -> Self {
        Self { path: path.to_string(), src, used: Vec::new(), out: Map::new() }
    }

    fn at(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn take(&mut self, key: &str) -> Option<&'a Value> {
        let v = self.src.get(key);
        if v.is_some() {
            self.used.push(key.to_string());
        }
        v
    }

    fn check(&self, r: &mut Report, key: &str, x: f64, check: Check) -> f64 {
        let ok = match check {
            Check::Any => x.is_finite(),
            Check::NonNegative => x.is_finite() && x >= 0.0,
            Check::Positive => x.is_finite() && x > 0.0,
        };
        if !ok {
            let what = match check {
                Check::Any => "finite",
                Check::NonNegative => "non-negative",
                Check::Positive => "positive",
            };
            r.push(&self.at(key), format!("must be {what}, got {x}"));
            return f64::NAN;
        }
        x
    }

    fn opt_num(&mut self, r: &mut Report, key: &str, check: Check) -> Option<f64> {
        let v = self.take(key)?;
        match v.as_f64() {
            Some(x) => {
                self.out.insert(key.to_string(), v.clone());
                Some(self.check(r, key, x, check))
            }
            None => {
                r.push(&self.at(key), "expected a number");
                Some(f64::NAN)
            }
        }
    }

    fn num(&mut self, r: &mut Report, key: &str, default: Option<f64>, check: Check) -> f64 {
        match (self.opt_num(r, key, check), default) {
            (Some(x), _) => x,
            (None, Some(d)) => {
                self.out.insert(key.to_string(), Value::from(d));
                d
            }
            (None, None) => {
                r.push(&self.at(key), "missing required field");
                f64::NAN
            }
        }
    }

    /// Angular frequency from `<base>_MHz` (ordinary frequency) or `<base>_rad_s`.
    fn opt_freq(&mut self, r: &mut Report, base: &str, check: Check) -> Option<f64> {
        let (k_mhz, k_rad) = (format!("{base}_MHz"), format!("{base}_rad_s"));
        let a = self.opt_num(r, &k_mhz, check);
        let b = self.opt_num(r, &k_rad, check);
        match (a, b) {
            (Some(_), Some(_)) => {
                r.push(&self.at(&k_mhz), format!("give either {k_mhz} or {k_rad}, not both"));
                Some(f64::NAN)
            }
            (Some(x), None) => Some(mhz(x)),
            (None, Some(x)) => Some(x),
            (None, None) => None,
        }
    }

    fn freq(&mut self, r: &mut Report, base: &str, default_mhz: Option<f64>, check: Check) -> f64 {
        match (self.opt_freq(r, base, check), default_mhz) {
            (Some(x), _) => x,
            (None, Some(d)) => {
                self.out.insert(format!("{base}_MHz"), Value::from(d));
                mhz(d)
            }
            (None, None) => {
                r.push(&self.at(&format!("{base}_MHz")), format!("missing required field (or {base}_rad_s)"));
                f64::NAN
            }
        }
    }

    fn boolean(&mut self, r: &mut Report, key: &str, default: bool) -> bool {
        match self.take(key) {
            Some(Value::Bool(b)) => {
                self.out.insert(key.to_string(), Value::Bool(*b));
                *b
            }
            Some(_) => {
                r.push(&self.at(key), "expected true or false");
                default
            }
            None => {
                self.out.insert(key.to_string(), Value::Bool(default));
                default
            }
        }
    }

    fn string(&mut self, r: &mut Report, key: &str, allowed: &[&str], default: Option<&str>) -> Option<String> {
        match self.take(key) {
            Some(Value::String(s)) if allowed.contains(&s.as_str()) => {
                self.out.insert(key.to_string(), Value::String(s.clone()));
                Some(s.clone())
            }
            Some(_) => {
                r.push(&self.at(key), format!("expected one of {allowed:?}"));
                None
            }
            None => match default {
                Some(d) => {
                    self.out.insert(key.to_string(), Value::String(d.to_string()));
                    Some(d.to_string())
                }
                None => {
                    r.push(&self.at(key), format!("missing required field (one of {allowed:?})"));
                    None
                }
            },
        }
    }

    fn opt_array(&mut self, r: &mut Report, key: &str, check: Check) -> Option<Vec<f64>> {
        let v = self.take(key)?;
        let Some(items) = v.as_array() else {
            r.push(&self.at(key), "expected an array of numbers");
            return Some(Vec::new());
        };
        if items.is_empty() {
            r.push(&self.at(key), "must not be empty");
        }
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            match item.as_f64() {
                Some(x) => out.push(self.check(r, &format!("{key}[{i}]"), x, check)),
                None => r.push(&self.at(&format!("{key}[{i}]")), "expected a number"),
            }
        }
        self.out.insert(key.to_string(), v.clone());
        Some(out)
    }

    fn opt_count(&mut self, r: &mut Report, key: &str) -> Option<usize> {
        let v = self.take(key)?;
        match v.as_u64() {
            Some(n) => {
                self.out.insert(key.to_string(), v.clone());
                Some(n as usize)
            }
            None => {
                r.push(&self.at(key), "expected a non-negative integer");
                Some(0)
            }
        }
    }

    fn count(&mut self, r: &mut Report, key: &str, default: usize) -> usize {
        self.opt_count(r, key).unwrap_or_else(|| {
            self.out.insert(key.to_string(), Value::from(default));
            default
        })
    }

    fn object(&mut self, r: &mut Report, key: &str) -> Option<&'a Map<String, Value>> {
        match self.take(key)? {
            Value::Object(m) => Some(m),
            _ => {
                r.push(&self.at(key), "expected an object");
                None
            }
        }
    }

    fn finish(self, r: &mut Report) -> Value {
        for k in self.src.keys() {
            if !self.used.contains(k) {
                r.push(&self.at(k), "unknown key");
            }
        }
        Value::Object(self.out)
    }
}

fn us(x: f64) -> f64 {
    x * 1e-6
}

fn um(x: f64) -> f64 {
    x * 1e-6
}

fn parse_gate(r: &mut Report, src: &Map<String, Value>) -> (Option<GateConfig>, Value) {
    let mut b = Block::new("gate", src);
    let t = us(b.num(r, "T_us", None, Check::Positive));
    let omega_max = b.opt_freq(r, "Omega_max", Check::Positive);
    let area = b.opt_num(r, "pulse_area_pi", Check::Positive);
    if omega_max.is_some() && area.is_some() {
        r.push("gate.pulse_area_pi", "give either Omega_max or pulse_area_pi, not both");
    }
    let symmetric = b.opt_freq(r, "V_dd_over_2", Check::Any);
    let v1 = b.opt_freq(r, "V_1A_over_2", Check::Any);
    let v2 = b.opt_freq(r, "V_2A_over_2", Check::Any);
    let coupling = match (symmetric, v1, v2) {
        (Some(v), None, None) => Some(CouplingSpec::symmetric(2.0 * v)),
        (None, Some(a), Some(c)) => Some(CouplingSpec { v_1a: 2.0 * a, v_2a: 2.0 * c }),
        _ => {
            r.push("gate.V_dd_over_2_MHz", "give V_dd_over_2, or both V_1A_over_2 and V_2A_over_2");
            None
        }
    };
    let delta_l = b.freq(r, "Delta_L", Some(0.0), Check::Any);
    let delta_am = b.freq(r, "Delta_AM", Some(0.0), Check::Any);
    let tau_r = us(b.num(r, "tau_r_us", Some(97.0), Check::Positive));
    let tau_R = us(b.num(r, "tau_R_us", Some(126.0), Check::Positive));
    let include_decay = b.boolean(r, "include_decay", false);
    let x_am = um(b.num(r, "x_am_um", Some(1.0), Check::Positive));
    let delta_x = um(b.num(r, "delta_x_um", Some(0.2), Check::NonNegative));
    let lattice = um(b.num(r, "lattice_spacing_um", Some(2.0), Check::Positive));
    if omega_max.is_none() && area.is_none() {
        b.out.insert("pulse_area_pi".into(), Value::from(2.0));
    }
    let normalized = b.finish(r);

    let pulse = match (omega_max, area) {
        (Some(w), None) => PulseSchedule::sine(t, w).ok(),
        (None, a) => PulseSchedule::sine_with_area(t, a.unwrap_or(2.0) * PI).ok(),
        _ => None,
    };
    let config = match (pulse, coupling) {
        (Some(pulse), Some(coupling)) if t.is_finite() => Some(GateConfig {
            pulse,
            coupling,
            detuning: DetuningSpec { delta_l, delta_am },
            decay: DecaySpec::from_lifetimes(tau_r, tau_R),
            geometry: GeometrySpec { x_am, delta_x, lattice_spacing: lattice },
            include_decay,
        }),
        _ => None,
    };
    (config, normalized)
}

fn parse_protocol(r: &mut Report, src: &Map<String, Value>) -> (Option<ProtocolSpec>, Value) {
    let mut b = Block::new("protocol", src);
    let kind = b.string(r, "kind", &["two_atom", "three_atom"], None);
    let t1 = us(b.num(r, "T1_us", None, Check::Positive));
    let t2 = us(b.num(r, "T2_us", None, Check::Positive));
    let perfect = b.boolean(r, "perfect_blockade", false);
    let v_rr = b.opt_freq(r, "V_rr", Check::NonNegative);
    let v_rR = b.opt_freq(r, "V_rR", Check::Positive);
    let v_rr = match (perfect, v_rr) {
        (true, Some(_)) => {
            r.push("protocol.V_rr_MHz", "V_rr conflicts with perfect_blockade");
            None
        }
        (true, None) => Some(f64::INFINITY),
        (false, Some(v)) => Some(v),
        (false, None) => {
            r.push("protocol.V_rr_MHz", "missing required field (or set perfect_blockade)");
            None
        }
    };
    let spec = match kind.as_deref() {
        Some("two_atom") => {
            if v_rR.is_some() {
                r.push("protocol.V_rR_MHz", "only used by the three-atom protocol");
            }
            v_rr.and_then(|v| ProtocolSpec::two_atom(t1, t2, v).ok())
        }
        Some("three_atom") => match v_rR {
            Some(vR) => v_rr.and_then(|v| ProtocolSpec::three_atom(t1, t2, v, vR).ok()),
            None => {
                r.push("protocol.V_rR_MHz", "missing required field for the three-atom protocol");
                None
            }
        },
        _ => None,
    };
    (spec, b.finish(r))
}

fn parse_budget(r: &mut Report, src: &Map<String, Value>) -> (BudgetExtras, Value) {
    let mut b = Block::new("budget", src);
    let e_ryd = b.opt_freq(r, "E_ryd", Check::Positive);
    let vdw_override = b.opt_num(r, "vdw_error_override", Check::NonNegative);
    let delta_nnn = b.opt_freq(r, "Delta_NNN", Check::Positive);
    let nnn_geometry = b.opt_num(r, "nnn_geometry_factor", Check::Positive);
    let d_m = b.opt_num(r, "d_M_D", Check::Positive);
    let mm_sep = b.opt_num(r, "molecule_separation_um", Check::Positive);
    let mu0 = b.opt_num(r, "mu0_D", Check::Positive);
    let stark_ratio = b.opt_num(r, "stark_ratio", Check::NonNegative);
    let include_transition = b.boolean(r, "include_transition_detuning", false);
    let nnn = delta_nnn.map(|d| {
        let mut s = NnnSpec::square_lattice(d);
        if let Some(g) = nnn_geometry {
            s.geometry_factor = g;
        }
        s
    });
    if nnn_geometry.is_some() && delta_nnn.is_none() {
        r.push("budget.nnn_geometry_factor", "requires Delta_NNN");
    }
    let molecule_molecule = match (d_m, mm_sep) {
        (Some(d), Some(s)) => Some((d * DEBYE, um(s))),
        (None, None) => None,
        _ => {
            r.push("budget.d_M_D", "d_M_D and molecule_separation_um go together");
            None
        }
    };
    let field_induced = match (mu0, stark_ratio) {
        (Some(m), Some(s)) => Some(FieldInducedSpec { mu0: m * DEBYE, stark_ratio: s, x_am: f64::NAN }),
        (None, None) => None,
        _ => {
            r.push("budget.mu0_D", "mu0_D and stark_ratio go together");
            None
        }
    };
    let extras = BudgetExtras { e_ryd, vdw_override, nnn, molecule_molecule, field_induced, include_transition_detuning: include_transition };
    (extras, b.finish(r))
}

fn parse_scaling(r: &mut Report, src: &Map<String, Value>, scenario: Scenario) -> (Option<ScalingRequest>, Value) {
    let mut b = Block::new("scaling", src);
    let caf = ScalingAnchors::caf();
    let anchors = ScalingAnchors {
        f0: b.num(r, "f0_MHz", Some(caf.f0 / 1e6), Check::Positive) * 1e6,
        n0: b.num(r, "n0", Some(caf.n0), Check::Positive),
        v_dd0: 2.0 * b.freq(r, "V_dd0_over_2", Some(2.02), Check::Positive),
        d_m0: b.num(r, "d_M0_D", Some(caf.d_m0 / DEBYE), Check::Positive) * DEBYE,
        gamma_r0: 1.0 / us(b.num(r, "tau_r0_us", Some(97.0), Check::Positive)),
        gamma_R0: 1.0 / us(b.num(r, "tau_R0_us", Some(126.0), Check::Positive)),
        gamma_r0_zero_k: 1.0 / us(b.num(r, "tau_r0_0K_us", Some(187.0), Check::Positive)),
        gamma_R0_zero_k: 1.0 / us(b.num(r, "tau_R0_0K_us", Some(499.0), Check::Positive)),
        e_ryd0: b.freq(r, "E_ryd0", Some(3000.0), Check::Positive),
    };
    let f = b.opt_num(r, "f_MHz", Check::Positive);
    let grid = b.opt_array(r, "f_grid_MHz", Check::Positive);
    let f = match (scenario, f, grid) {
        (Scenario::Optimize, Some(f), None) => vec![f * 1e6],
        (Scenario::ScanFrequency, None, Some(g)) => g.iter().map(|x| x * 1e6).collect(),
        (Scenario::Optimize, _, _) => {
            r.push("scaling.f_MHz", "optimize takes exactly one rotational frequency f_MHz (and no f_grid_MHz)");
            Vec::new()
        }
        _ => {
            r.push("scaling.f_grid_MHz", "scan_frequency takes f_grid_MHz (and no f_MHz)");
            Vec::new()
        }
    };
    let d_m = b.num(r, "d_M_D", Some(caf.d_m0 / DEBYE), Check::Positive) * DEBYE;
    let env = b.string(r, "environment", &["300K", "0K"], Some("300K"));
    let dx_over_x = b.num(r, "dx_over_x", Some(0.2), Check::NonNegative);
    let environment = if env.as_deref() == Some("0K") { Environment::Zero } else { Environment::Room };
    (Some(ScalingRequest { anchors, f, d_m, environment, dx_over_x }), b.finish(r))
}

fn parse_distance(r: &mut Report, src: &Map<String, Value>) -> (Option<(DistanceScanSpec, ProtocolKind)>, Value) {
    let mut b = Block::new("distance", src);
    let kind = b.string(r, "kind", &["two_atom", "three_atom"], None);
    // Coefficients in ordinary frequency: V/2π = c/x^k with MHz·μm^k.
    let c3 = b.opt_num(r, "c3_rR_MHz_um3", Check::Positive);
    let c6 = b.opt_num(r, "c6_rr_MHz_um6", Check::Positive);
    let calibration = b.object(r, "calibration");
    let mut cal_out = None;
    let coeffs = match (c3, c6, calibration) {
        (Some(c3), Some(c6), None) => Some((mhz(c3) * 1e-18, mhz(c6) * 1e-36)),
        (None, None, Some(m)) => {
            let mut cb = Block::new("distance.calibration", m);
            let x0 = um(cb.num(r, "x0_um", None, Check::Positive));
            let v_rR = cb.freq(r, "V_rR", None, Check::Positive);
            let v_rr = cb.freq(r, "V_rr", None, Check::Positive);
            cal_out = Some(cb.finish(r));
            DistanceScanSpec::calibrate(x0, v_rR, v_rr).ok()
        }
        _ => {
            r.push(
                "distance.c3_rR_MHz_um3",
                "supply both c3_rR_MHz_um3 and c6_rr_MHz_um6, or a calibration {x0_um, V_rR_MHz, V_rr_MHz} instead",
            );
            None
        }
    };
    let x_values = b.opt_array(r, "x_um", Check::Positive).unwrap_or_else(|| {
        r.push("distance.x_um", "missing required field");
        Vec::new()
    });
    let t1 = us(b.num(r, "T1_us", Some(0.3), Check::Positive));
    let t2 = us(b.num(r, "T2_us", Some(0.3), Check::Positive));
    let v_dd = 2.0 * b.freq(r, "V_dd_over_2", Some(9.5), Check::Positive);
    let tau_r = us(b.num(r, "tau_r_us", Some(97.0), Check::Positive));
    let tau_R = us(b.num(r, "tau_R_us", Some(126.0), Check::Positive));
    if let Some(c) = cal_out {
        b.out.insert("calibration".into(), c);
    }
    let normalized = b.finish(r);
    let protocol = match kind.as_deref() {
        Some("two_atom") => Some(ProtocolKind::CzTwoAtom),
        Some("three_atom") => Some(ProtocolKind::CzThreeAtom),
        _ => None,
    };
    let spec = coeffs.zip(protocol).map(|((c3, c6), p)| {
        (
            DistanceScanSpec {
                c3_rR: c3,
                c6_rr: c6,
                x_values: x_values.iter().map(|&x| um(x)).collect(),
                t1,
                t2,
                v_dd_fixed: v_dd,
                gamma_r: 1.0 / tau_r,
                gamma_R: 1.0 / tau_R,
            },
            p,
        )
    });
    if let Some((s, _)) = &spec {
        if let Err(e) = s.validate() {
            r.push("distance", e.to_string());
        }
    }
    (spec, normalized)
}

fn parse_motion(r: &mut Report, src: &Map<String, Value>, gate: Option<&GateConfig>) -> (Option<MotionRequest>, Value) {
    let mut b = Block::new("motion", src);
    let omega_m = b.freq(r, "omega_m", Some(0.1), Check::Positive);
    let a0 = b.opt_num(r, "a0_um", Check::NonNegative).map(um);
    let n_max = b.count(r, "n_max", 6);
    let nbar = b.num(r, "nbar", Some(1.0), Check::NonNegative);
    let grid = b.opt_array(r, "nbar_grid", Check::Positive);
    let cutoff = b.opt_count(r, "thermal_cutoff");
    let normalized = b.finish(r);
    if n_max < 3 {
        r.push("motion.n_max", "must be at least 3");
    }
    let req = gate.map(|g| {
        let a0 = a0.unwrap_or_else(|| oscillator_length(CAF_MASS, omega_m));
        let x = g.geometry.x_am;
        MotionRequest {
            spec: MotionSpec { omega_m, a0, n_max, nbar, c3_am: g.coupling.v_1a * x.powi(3), x_eq: x, thermal_cutoff: cutoff },
            nbar_grid: grid,
        }
    });
    (req, normalized)
}

fn parse_readout(r: &mut Report, src: &Map<String, Value>) -> (StirapSpec, Value) {
    let d = StirapSpec::default();
    let mut b = Block::new("readout", src);
    let spec = StirapSpec {
        omega1_max: b.freq(r, "Omega1", Some(tidy(d.omega1_max / mhz(1.0))), Check::NonNegative),
        omega2_max: b.freq(r, "Omega2", Some(tidy(d.omega2_max / mhz(1.0))), Check::NonNegative),
        width: us(b.num(r, "width_us", Some(tidy(d.width * 1e6)), Check::Positive)),
        delay: us(b.num(r, "delay_us", Some(tidy(d.delay * 1e6)), Check::NonNegative)),
    };
    (spec, b.finish(r))
}

fn parse_init(r: &mut Report, src: &Map<String, Value>) -> (PumpingSpec, Value) {
    let d = PumpingSpec::default();
    let mut b = Block::new("init", src);
    let delta = b.freq(r, "Delta", Some(tidy(d.delta / mhz(1.0))), Check::Any);
    let gamma_e = b.freq(r, "Gamma_e", Some(tidy(d.gamma_e / mhz(1.0))), Check::NonNegative);
    let omega1 = b.freq(r, "Omega1", Some(tidy(d.omega1 / mhz(1.0))), Check::NonNegative);
    let omega2 = b.freq(r, "Omega2", Some(tidy(d.omega2 / mhz(1.0))), Check::NonNegative);
    let ramp = us(b.num(r, "ramp_us", Some(tidy(d.ramp * 1e6)), Check::Positive));
    let durations = match b.opt_array(r, "durations_us", Check::Positive) {
        Some(v) => v.into_iter().map(us).collect(),
        None => {
            let v: Vec<f64> = d.durations.iter().map(|&x| tidy(x * 1e6)).collect();
            b.out.insert("durations_us".into(), Value::from(v.clone()));
            v.into_iter().map(us).collect()
        }
    };
    let spec = PumpingSpec { delta, gamma_e, omega1, omega2, ramp, durations };
    if let Err(e) = spec.validate() {
        if spec.delta.is_finite() && spec.ramp.is_finite() {
            r.push("init", e.to_string());
        }
    }
    (spec, b.finish(r))
}

/// Rounds a default converted to user units to 12 significant digits so the echo reads cleanly.
fn tidy(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Parses and validates a JSON config document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc: Value = serde_json::from_str(text)?;
    let Value::Object(root) = &doc else {
        return Err(Error::Config(ConfigErrors(vec![Violation { path: String::new(), message: "expected a JSON object".into() }])));
    };
    let mut r = Report::default();
    let mut b = Block::new("", root);

    let scenario = match b.take("scenario") {
        Some(Value::String(s)) => match Scenario::from_name(s) {
            Some(sc) => Some(sc),
            None => {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                r.push("scenario", format!("unknown scenario {s:?}; expected one of {names:?}"));
                None
            }
        },
        Some(_) => {
            r.push("scenario", "expected a string");
            None
        }
        None => {
            r.push("scenario", "missing required field");
            None
        }
    };
    if let Some(s) = scenario {
        b.out.insert("scenario".into(), Value::String(s.name().into()));
    }

    match b.object(&mut r, "units") {
        Some(units) => {
            let mut u = Block::new("units", units);
            for (k, expected) in UNITS {
                u.string(&mut r, k, &[expected], None);
            }
            let v = u.finish(&mut r);
            b.out.insert("units".into(), v);
        }
        None => {
            if !root.contains_key("units") {
                r.push("units", "missing required units object");
            }
        }
    }

    let mut output_path = None;
    let mut format = Format::Csv;
    if let Some(o) = b.object(&mut r, "output") {
        let mut ob = Block::new("output", o);
        match ob.take("path") {
            Some(Value::String(p)) => {
                ob.out.insert("path".into(), Value::String(p.clone()));
                output_path = Some(p.clone());
            }
            Some(_) => r.push("output.path", "expected a string"),
            None => {}
        }
        if ob.string(&mut r, "format", &["csv", "json"], Some("csv")).as_deref() == Some("json") {
            format = Format::Json;
        }
        let v = ob.finish(&mut r);
        b.out.insert("output".into(), v);
    }

    let mut solver = GateOptions::default();
    let solver_src = b.object(&mut r, "solver");
    let empty = Map::new();
    {
        let mut sb = Block::new("solver", solver_src.unwrap_or(&empty));
        solver.tol = sb.num(&mut r, "tol", Some(solver.tol), Check::Positive);
        solver.samples = sb.count(&mut r, "samples", solver.samples);
        if solver.samples < 2 {
            r.push("solver.samples", "must be at least 2");
        }
        let v = sb.finish(&mut r);
        b.out.insert("solver".into(), v);
    }

    let (required, optional) = scenario.map(|s| s.blocks()).unwrap_or((&[], &[]));
    let known = ["gate", "protocol", "budget", "scaling", "distance", "motion", "readout", "init"];
    let mut cfg = RunConfig {
        scenario: scenario.unwrap_or(Scenario::Gate),
        normalized: Value::Null,
        output_path,
        format,
        solver,
        gate: None,
        protocol: None,
        budget: None,
        scaling: None,
        distance: None,
        motion: None,
        readout: None,
        init: None,
    };
    for name in known {
        let present = root.contains_key(name);
        let wanted = required.contains(&name) || optional.contains(&name);
        if scenario.is_some() && required.contains(&name) && !present {
            r.push(name, format!("block required by scenario {}", cfg.scenario.name()));
        }
        if present && scenario.is_some() && !wanted {
            r.push(name, format!("block not used by scenario {}", cfg.scenario.name()));
            b.take(name);
            continue;
        }
        if !wanted {
            b.take(name);
            continue;
        }
        let src = match b.object(&mut r, name) {
            Some(m) => m,
            None if optional.contains(&name) => &empty,
            None => continue,
        };
        let v = match name {
            "gate" => {
                let (g, v) = parse_gate(&mut r, src);
                cfg.gate = g;
                v
            }
            "protocol" => {
                let (p, v) = parse_protocol(&mut r, src);
                cfg.protocol = p;
                v
            }
            "budget" => {
                let (e, v) = parse_budget(&mut r, src);
                cfg.budget = Some(e);
                v
            }
            "scaling" => {
                let (s, v) = parse_scaling(&mut r, src, cfg.scenario);
                cfg.scaling = s;
                v
            }
            "distance" => {
                let (d, v) = parse_distance(&mut r, src);
                cfg.distance = d;
                v
            }
            "motion" => {
                let (m, v) = parse_motion(&mut r, src, cfg.gate.as_ref());
                cfg.motion = m;
                v
            }
            "readout" => {
                let (s, v) = parse_readout(&mut r, src);
                cfg.readout = Some(s);
                v
            }
            _ => {
                let (s, v) = parse_init(&mut r, src);
                cfg.init = Some(s);
                v
            }
        };
        b.out.insert(name.into(), v);
    }
    if let (Some(g), Some(extras)) = (&cfg.gate, cfg.budget.as_mut()) {
        if let Some(f) = extras.field_induced.as_mut() {
            f.x_am = g.geometry.x_am;
        }
    }
    if let (Some(g), true) = (&cfg.gate, r.0.is_empty()) {
        if let Err(e) = g.validate() {
            r.push("gate", e.to_string());
        }
        if matches!(cfg.scenario, Scenario::Budget) && g.coupling.v_dd().is_none() {
            r.push("gate.V_1A_over_2_MHz", "the budget scenario needs V_1A = V_2A");
        }
        if matches!(cfg.scenario, Scenario::Motion) && g.include_decay {
            r.push("gate.include_decay", "the motion scenario is unitary; set include_decay to false");
        }
    }

    cfg.normalized = b.finish(&mut r);
    if r.0.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(ConfigErrors(r.0)))
    }
}
