//! Gate simulation with quantized molecular motion along the molecule–atom axis.
//!
//! The three collective modes share the trap frequency `ω_m`. The centre-of-mass mode `a`
//! does not enter `δx₁ = δx_b + δx_c` or `δx₂ = δx_b − δx_c`, so it factors out exactly and
//! only the stretch modes `b` and `c` are simulated, with `δx_d = a₀ (d + d†)/2`.
//!
//! Each thermal Fock product `|n_b, n_c⟩` is propagated in a window of `n_max` Fock levels
//! per mode around its own occupation, so the Hilbert-space size stays `27·n_max²` while
//! the thermal sum reaches occupations far above `n_max`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{CAF_MASS, HBAR};
use crate::error::{invalid, Error, Result};
use crate::evolve::{propagate, PropagationOptions, TimeDependentOperator};
use crate::model::{atom, single_atom_components, GateConfig, Layout, ATOM_LEVELS, MOLECULE_LEVELS};
use crate::numerics::{Operator, SparseOperator, StateVector, C64, ZERO};

/// Joint thermal tail mass left out of the Fock sum must stay below this.
pub const MAX_TAIL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MotionSpec {
    pub omega_m: f64,
    /// Harmonic-oscillator length.
    pub a0: f64,
    /// Fock levels per mode in each simulation window.
    pub n_max: usize,
    pub nbar: f64,
    /// `V(x) = c3_am / x³` for both atom–molecule links.
    pub c3_am: f64,
    pub x_eq: f64,
    /// Highest initial Fock number per mode in the thermal sum; chosen from [`MAX_TAIL`] when absent.
    pub thermal_cutoff: Option<usize>,
}

impl MotionSpec {
    /// `ω_m = 2π×100 kHz`, `n_max = 6`, `a₀ = √(ħ/(m ω_m))` for CaF, and `c3_am` matching the
    /// configured `V_1A` at the configured separation.
    pub fn caf_default(config: &GateConfig, nbar: f64) -> Self {
        let omega_m = 2.0 * PI * 100e3;
        let x = config.geometry.x_am;
        Self { omega_m, a0: oscillator_length(CAF_MASS, omega_m), n_max: 6, nbar, c3_am: config.coupling.v_1a * x.powi(3), x_eq: x, thermal_cutoff: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 3 {
            return Err(invalid(format!("n_max must be at least 3, got {}", self.n_max)));
        }
        if !(self.nbar >= 0.0) || !self.nbar.is_finite() {
            return Err(invalid(format!("nbar must be non-negative, got {}", self.nbar)));
        }
        if !(self.omega_m > 0.0) || !(self.x_eq > 0.0) || !(self.a0 >= 0.0) {
            return Err(invalid("omega_m and x_eq must be positive and a0 non-negative"));
        }
        Ok(())
    }

    fn ratio(&self) -> f64 {
        self.nbar / (1.0 + self.nbar)
    }

    /// Two-mode tail mass beyond initial occupation `cutoff` per mode.
    pub fn tail_mass(&self, cutoff: usize) -> f64 {
        let p_in = 1.0 - self.ratio().powi(cutoff as i32 + 1);
        1.0 - p_in * p_in
    }

    /// Initial occupation cutoff actually used for the thermal sum.
    pub fn cutoff(&self) -> Result<usize> {
        match self.thermal_cutoff {
            Some(c) => {
                let tail = self.tail_mass(c);
                if tail >= MAX_TAIL {
                    return Err(Error::ThermalTail { tail, levels: c + 1 });
                }
                Ok(c)
            }
            None => Ok((0..).find(|&c| self.tail_mass(c) < MAX_TAIL).expect("tail vanishes")),
        }
    }

    /// Normalized thermal occupation probability of one mode.
    pub fn weight(&self, n: usize) -> f64 {
        (1.0 - self.ratio()) * self.ratio().powi(n as i32)
    }
}

/// `√(ħ/(m ω))`.
pub fn oscillator_length(mass: f64, omega: f64) -> f64 {
    (HBAR / (mass * omega)).sqrt()
}

/// Ladder operators of one mode restricted to Fock levels `lo .. lo + n`.
struct Window {
    lo: usize,
    n: usize,
}

impl Window {
    fn around(center: usize, n: usize) -> Self {
        Self { lo: center.saturating_sub(n / 2), n }
    }

    /// `(d + d†)/2`
    fn x(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n - 1)
            .flat_map(|k| {
                let v = 0.5 * ((self.lo + k + 1) as f64).sqrt();
                [(k, k + 1, v), (k + 1, k, v)]
            })
            .collect()
    }

    /// `((d + d†)/2)²`, exact within the window.
    fn x2(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::new();
        for k in 0..self.n {
            let n = (self.lo + k) as f64;
            t.push((k, k, 0.25 * (2.0 * n + 1.0)));
            if k + 2 < self.n {
                let v = 0.25 * ((n + 1.0) * (n + 2.0)).sqrt();
                t.push((k, k + 2, v));
                t.push((k + 2, k, v));
            }
        }
        t
    }

    fn number(&self, k: usize) -> f64 {
        (self.lo + k) as f64
    }
}

fn real_sparse(dim: usize, t: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<SparseOperator> {
    SparseOperator::from_triplets(dim, t.into_iter().map(|(i, j, v)| (i, j, C64::new(v, 0.0))))
}

/// Operators on the two-mode window `b ⊗ c`.
fn two_mode(wb: &Window, wc: &Window, tb: &[(usize, usize, f64)], tc: &[(usize, usize, f64)]) -> Result<SparseOperator> {
    let b = if tb.is_empty() { SparseOperator::identity(wb.n) } else { real_sparse(wb.n, tb.iter().copied())? };
    let c = if tc.is_empty() { SparseOperator::identity(wc.n) } else { real_sparse(wc.n, tc.iter().copied())? };
    Ok(b.kron(&c))
}

struct MotionModel {
    layout: Layout,
    h: TimeDependentOperator,
    phonon_dim: usize,
}

fn motion_model(config: &GateConfig, spec: &MotionSpec, wb: &Window, wc: &Window) -> Result<MotionModel> {
    config.validate()?;
    spec.validate()?;
    if config.include_decay {
        return Err(invalid("the motion model is unitary; disable decay"));
    }
    let (layout, det, links, drive) = single_atom_components(config);
    let pdim = wb.n * wc.n;
    let id = SparseOperator::identity(pdim);
    let (x, a0, c3) = (spec.x_eq, spec.a0, spec.c3_am);

    let xb = two_mode(wb, wc, &wb.x(), &[])?;
    let xc = two_mode(wb, wc, &[], &wc.x())?;
    let xb2 = two_mode(wb, wc, &wb.x2(), &[])?;
    let xc2 = two_mode(wb, wc, &[], &wc.x2())?;
    let xbxc = two_mode(wb, wc, &wb.x(), &wc.x())?;
    let mut h_stat = det.kron(&id);
    for (i, link) in links.iter().enumerate() {
        let s = if i == 0 { 1.0 } else { -1.0 };
        // δx_i = a₀ (X_b ± X_c),  δx_i² = a₀² (X_b² + X_c² ± 2 X_b X_c)
        let dx = xb.add(&xc.scale(C64::new(s, 0.0)))?;
        let dx2 = xb2.add(&xc2)?.add(&xbxc.scale(C64::new(2.0 * s, 0.0)))?;
        let v = id
            .scale(C64::new(c3 / x.powi(3), 0.0))
            .add(&dx.scale(C64::new(-3.0 * c3 / x.powi(4) * a0, 0.0)))?
            .add(&dx2.scale(C64::new(6.0 * c3 / x.powi(5) * a0 * a0, 0.0)))?;
        h_stat = h_stat.add(&link.kron(&v))?;
    }
    let h_ph = real_sparse(pdim, (0..wb.n).flat_map(|i| (0..wc.n).map(move |j| (i * wc.n + j, i * wc.n + j, spec.omega_m * (wb.number(i) + wc.number(j) + 1.0)))))?;
    h_stat = h_stat.add(&SparseOperator::identity(layout.dim()).kron(&h_ph))?;

    let mut h = TimeDependentOperator::new(layout.dim() * pdim);
    h.add_constant(h_stat)?;
    let pulse = config.pulse;
    h.add_modulated(Arc::new(move |t| pulse.omega(t)), drive.kron(&id))?;
    Ok(MotionModel { layout, h, phonon_dim: pdim })
}

/// Full phonon-coupled Hamiltonian on Fock levels `0 .. n_max` of modes `b` and `c`
/// (dim `27·n_max²`, basis molecule ⊗ molecule ⊗ atom ⊗ b ⊗ c).
pub fn build_motion_hamiltonian(config: &GateConfig, spec: &MotionSpec, t: f64) -> Result<Operator> {
    spec.validate()?;
    let duration = config.pulse.duration;
    if !(0.0..=duration).contains(&t) {
        return Err(Error::TimeOutOfRange { t, duration });
    }
    let w = Window { lo: 0, n: spec.n_max };
    let m = motion_model(config, spec, &w, &Window { lo: 0, n: spec.n_max })?;
    Ok(m.h.at(t).to_operator())
}

/// Outcome of one initial Fock product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockSector {
    pub n_b: usize,
    pub n_c: usize,
    /// Normalized thermal weight.
    pub weight: f64,
    pub error: f64,
    /// Change of `n_b + n_c` over the gate.
    pub delta_n: f64,
    /// `|‖ψ(T)‖² − 1|` of the sector run.
    pub norm_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotionResult {
    pub nbar: f64,
    /// Thermal gate error minus the frozen-geometry error.
    pub eps_motion: f64,
    /// Mean change of the occupation per mode.
    pub delta_nbar: f64,
    pub frozen_error: f64,
    pub thermal_error: f64,
    pub thermal_cutoff: usize,
    pub tail_mass: f64,
    pub sectors: Vec<FockSector>,
}

fn qubit_target() -> [(usize, f64); 4] {
    [(0, -0.5), (1, 0.5), (MOLECULE_LEVELS, 0.5), (MOLECULE_LEVELS + 1, 0.5)]
}

/// Gate error on the molecular state and phonon-number change for one initial Fock product.
fn run_sector(config: &GateConfig, spec: &MotionSpec, n_b: usize, n_c: usize, tol: f64) -> Result<(f64, f64, f64)> {
    let wb = Window::around(n_b, spec.n_max);
    let wc = Window::around(n_c, spec.n_max);
    let m = motion_model(config, spec, &wb, &wc)?;
    let pdim = m.phonon_dim;
    let p0 = (n_b - wb.lo) * wc.n + (n_c - wc.lo);
    let mut amps = vec![ZERO; m.layout.dim() * pdim];
    for &(mol, s) in &qubit_target() {
        let i = m.layout.index(mol / MOLECULE_LEVELS, mol % MOLECULE_LEVELS, &[atom::g]);
        amps[i * pdim + p0] = C64::new(s.abs(), 0.0);
    }
    let psi0 = StateVector::new(amps)?;
    let psi = propagate(&m.h, &psi0, &[0.0, config.pulse.duration], &PropagationOptions::with_tol(tol))?.final_state().clone();
    let a = psi.amplitudes();

    let mut fidelity = 0.0;
    for lvl in 0..ATOM_LEVELS {
        for p in 0..pdim {
            let overlap: C64 = qubit_target()
                .iter()
                .map(|&(mol, s)| a[m.layout.index(mol / MOLECULE_LEVELS, mol % MOLECULE_LEVELS, &[lvl]) * pdim + p] * s)
                .sum();
            fidelity += overlap.norm_sqr();
        }
    }
    let mut n_final = 0.0;
    for (k, amp) in a.iter().enumerate() {
        let p = k % pdim;
        n_final += amp.norm_sqr() * (wb.number(p / wc.n) + wc.number(p % wc.n));
    }
    Ok(((1.0 - fidelity).clamp(0.0, 1.0), n_final - (n_b + n_c) as f64, (psi.norm_squared() - 1.0).abs()))
}

/// Tolerance of the motional propagations.
pub const MOTION_TOL: f64 = 1e-10;

/// Frozen-geometry gate error: same model with `a₀ = 0`.
pub fn frozen_error(config: &GateConfig, spec: &MotionSpec) -> Result<f64> {
    let frozen = MotionSpec { a0: 0.0, nbar: 0.0, ..*spec };
    Ok(run_sector(config, &frozen, 0, 0, MOTION_TOL)?.0)
}

/// Exact thermal average over Fock products `(n_b, n_c)`.
pub fn run_motion_thermal(config: &GateConfig, spec: &MotionSpec) -> Result<MotionResult> {
    spec.validate()?;
    let cutoff = spec.cutoff()?;
    let pairs: Vec<(usize, usize)> = (0..=cutoff).flat_map(|b| (0..=cutoff).map(move |c| (b, c))).collect();
    let norm: f64 = pairs.iter().map(|&(b, c)| spec.weight(b) * spec.weight(c)).sum();
    let runs: Vec<Result<FockSector>> = pairs
        .par_iter()
        .map(|&(n_b, n_c)| {
            let (error, delta_n, norm_defect) = run_sector(config, spec, n_b, n_c, MOTION_TOL)?;
            Ok(FockSector { n_b, n_c, weight: spec.weight(n_b) * spec.weight(n_c) / norm, error, delta_n, norm_defect })
        })
        .collect();
    let sectors = runs.into_iter().collect::<Result<Vec<_>>>().map_err(|e| e.context("motion"))?;
    let thermal_error: f64 = sectors.iter().map(|s| s.weight * s.error).sum();
    let delta_nbar = 0.5 * sectors.iter().map(|s| s.weight * s.delta_n).sum::<f64>();
    let frozen = frozen_error(config, spec)?;
    Ok(MotionResult {
        nbar: spec.nbar,
        eps_motion: thermal_error - frozen,
        delta_nbar,
        frozen_error: frozen,
        thermal_error,
        thermal_cutoff: cutoff,
        tail_mass: spec.tail_mass(cutoff),
        sectors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqrtScan {
    pub results: Vec<MotionResult>,
    /// Least-squares slope of `ln eps_motion` against `ln n̄`.
    pub exponent: f64,
}

impl SqrtScan {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "nbar,eps_motion,delta_nbar")?;
        for r in &self.results {
            writeln!(w, "{:.11e},{:.11e},{:.11e}", r.nbar, r.eps_motion, r.delta_nbar)?;
        }
        Ok(())
    }
}

pub fn run_motion_sqrt_scan(config: &GateConfig, spec: &MotionSpec, nbar_grid: &[f64]) -> Result<SqrtScan> {
    if nbar_grid.len() < 4 || nbar_grid.iter().any(|n| !(0.25..=4.0).contains(n)) {
        return Err(invalid("n̄ grid needs at least 4 values in [0.25, 4]"));
    }
    let results = nbar_grid
        .iter()
        .map(|&nbar| run_motion_thermal(config, &MotionSpec { nbar, ..*spec }))
        .collect::<Result<Vec<_>>>()?;
    if results.iter().any(|r| !(r.eps_motion > 0.0)) {
        return Err(invalid("eps_motion must be positive on every grid point to fit an exponent"));
    }
    let pts: Vec<(f64, f64)> = results.iter().map(|r| (r.nbar.ln(), r.eps_motion.ln())).collect();
    Ok(SqrtScan { exponent: log_slope(&pts), results })
}

fn log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Classical separations `(x₁(t), x₂(t))` of the two molecules from the atom.
pub type Displacement = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Gate error with `V_iA(t) = V_iA (x_AM / x_i(t))³`, minus the error at fixed `x_AM`.
pub fn run_position_perturbation(config: &GateConfig, displacement: Displacement) -> Result<f64> {
    config.validate()?;
    if config.include_decay {
        return Err(invalid("position perturbation runs are unitary; disable decay"));
    }
    let (layout, det, links, drive) = single_atom_components(config);
    let x0 = config.geometry.x_am;
    let duration = config.pulse.duration;
    let samples = 257;
    for k in 0..samples {
        let (x1, x2) = displacement(duration * k as f64 / (samples - 1) as f64);
        if !(x1 > 0.0 && x2 > 0.0) {
            return Err(invalid("displaced separations must stay positive"));
        }
    }
    let build = |d: Option<Displacement>| -> Result<TimeDependentOperator> {
        let mut h = TimeDependentOperator::new(layout.dim());
        h.add_constant(det.clone())?;
        let pulse = config.pulse;
        h.add_modulated(Arc::new(move |t| pulse.omega(t)), drive.clone())?;
        for (i, v) in [config.coupling.v_1a, config.coupling.v_2a].into_iter().enumerate() {
            match &d {
                None => h.add_constant(links[i].scale(C64::new(v, 0.0)))?,
                Some(d) => {
                    let d = d.clone();
                    h.add_modulated(
                        Arc::new(move |t| {
                            let (x1, x2) = d(t);
                            v * (x0 / if i == 0 { x1 } else { x2 }).powi(3)
                        }),
                        links[i].clone(),
                    )?
                }
            }
        }
        Ok(h)
    };
    let err = |h: &TimeDependentOperator| -> Result<f64> {
        let pdim = 1;
        let mut amps = vec![ZERO; layout.dim()];
        for &(mol, s) in &qubit_target() {
            amps[layout.index(mol / MOLECULE_LEVELS, mol % MOLECULE_LEVELS, &[atom::g]) * pdim] = C64::new(s.abs(), 0.0);
        }
        let psi = propagate(h, &StateVector::new(amps)?, &[0.0, duration], &PropagationOptions::with_tol(MOTION_TOL))?.final_state().clone();
        let a = psi.amplitudes();
        let f: f64 = (0..ATOM_LEVELS)
            .map(|lvl| qubit_target().iter().map(|&(mol, s)| a[layout.index(mol / MOLECULE_LEVELS, mol % MOLECULE_LEVELS, &[lvl])] * s).sum::<C64>().norm_sqr())
            .sum();
        Ok(1.0 - f)
    };
    let baseline = err(&build(None)?)?;
    let perturbed = err(&build(Some(displacement))?)?;
    Ok(perturbed - baseline)
}
