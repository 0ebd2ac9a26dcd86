//! Physical parameters, dipole-dipole geometry and the rotating-frame Hamiltonians.
//!
//! Basis convention everywhere: molecule 1 ⊗ molecule 2 ⊗ atom(s) ⊗ phonons, molecule
//! levels ordered (0, 1, 2) and atom levels (g, r, R). When decay is on, each atom gets a
//! fourth absorbing `lost` level fed by the jumps `√Γ_r|lost⟩⟨r|` and `√Γ_R|lost⟩⟨R|`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants::{EPSILON_0, HBAR};
use crate::error::{invalid, Error, Result};
use crate::evolve::TimeDependentOperator;
use crate::numerics::{Operator, SparseOperator, StateVector, C64};

/// Atom level indices.
#[allow(non_upper_case_globals)]
pub mod atom {
    pub const g: usize = 0;
    pub const r: usize = 1;
    pub const R: usize = 2;
    /// Absorbing sink, present only when decay is simulated.
    pub const lost: usize = 3;
}

pub const ATOM_LEVELS: usize = 3;

pub const MOLECULE_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Sine,
}

/// Smooth laser pulse `Ω(t) = Ω_max sin(πt/T)` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub shape: PulseShape,
    /// Duration `T` in s.
    pub duration: f64,
    /// Peak Rabi frequency in rad/s.
    pub omega_max: f64,
}

impl PulseSchedule {
    pub fn sine(duration: f64, omega_max: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(invalid(format!("pulse duration must be positive, got {duration}")));
        }
        if !(omega_max >= 0.0 && omega_max.is_finite()) {
            return Err(invalid(format!("peak Rabi frequency must be non-negative, got {omega_max}")));
        }
        Ok(Self { shape: PulseShape::Sine, duration, omega_max })
    }

    /// Sine pulse with the given area in radians; a 2π pulse has `Ω_max = π²/T`.
    pub fn sine_with_area(duration: f64, area: f64) -> Result<Self> {
        if duration <= 0.0 {
            return Err(invalid(format!("pulse duration must be positive, got {duration}")));
        }
        Self::sine(duration, area * PI / (2.0 * duration))
    }

    pub fn area(&self) -> f64 {
        2.0 * self.duration * self.omega_max / PI
    }

    /// Rabi frequency at `t`; zero outside the pulse and exactly zero at both ends.
    pub fn omega(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.duration {
            return 0.0;
        }
        match self.shape {
            PulseShape::Sine => self.omega_max * (PI * t / self.duration).sin(),
        }
    }
}

/// Full atom-molecule couplings `V_1A`, `V_2A` in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub v_1a: f64,
    pub v_2a: f64,
}

impl CouplingSpec {
    pub fn symmetric(v_dd: f64) -> Self {
        Self { v_1a: v_dd, v_2a: v_dd }
    }

    /// The common coupling when both are equal.
    pub fn v_dd(&self) -> Option<f64> {
        ((self.v_1a - self.v_2a).abs() <= 1e-12 * self.v_1a.abs()).then_some(self.v_1a)
    }
}

/// Laser detuning `Δ_L` and atom-molecule transition mismatch `Δ_AM`, rad/s.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DetuningSpec {
    pub delta_l: f64,
    pub delta_am: f64,
}

/// Decay rates (1/s) of the two Rydberg levels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DecaySpec {
    pub gamma_r: f64,
    pub gamma_R: f64,
}

impl DecaySpec {
    pub fn from_lifetimes(tau_r: f64, tau_R: f64) -> Self {
        Self { gamma_r: 1.0 / tau_r, gamma_R: 1.0 / tau_R }
    }
}

/// Geometry in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub x_am: f64,
    pub delta_x: f64,
    pub lattice_spacing: f64,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        Self { x_am: 1e-6, delta_x: 0.2e-6, lattice_spacing: 2e-6 }
    }
}

/// Everything needed for one gate run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub pulse: PulseSchedule,
    pub coupling: CouplingSpec,
    pub detuning: DetuningSpec,
    pub decay: DecaySpec,
    pub geometry: GeometrySpec,
    pub include_decay: bool,
}

impl GateConfig {
    /// CaF/Rb working point: `V_dd/2 = 2π×2.02 MHz`, `T = 1.25 μs`, 2π pulse, 300 K lifetimes, decay off.
    pub fn caf_default() -> Self {
        Self {
            pulse: PulseSchedule::sine_with_area(1.25e-6, 2.0 * PI).expect("valid"),
            coupling: CouplingSpec::symmetric(2.0 * crate::constants::mhz(2.02)),
            detuning: DetuningSpec::default(),
            decay: DecaySpec::from_lifetimes(97e-6, 126e-6),
            geometry: GeometrySpec::default(),
            include_decay: false,
        }
    }

    /// 4 atom levels (with the sink) when decay is on, 3 otherwise.
    pub fn atom_levels(&self) -> usize {
        if self.include_decay {
            ATOM_LEVELS + 1
        } else {
            ATOM_LEVELS
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        if !(g.x_am > 0.0) {
            return Err(invalid("x_am must be positive"));
        }
        if !(g.delta_x >= 0.0 && g.delta_x < g.x_am) {
            return Err(invalid("delta_x must satisfy 0 <= delta_x < x_am"));
        }
        if self.decay.gamma_r < 0.0 || self.decay.gamma_R < 0.0 {
            return Err(invalid("decay rates must be non-negative"));
        }
        let finite = [self.coupling.v_1a, self.coupling.v_2a, self.detuning.delta_l, self.detuning.delta_am];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(invalid("couplings and detunings must be finite"));
        }
        Ok(())
    }

}

/// One dipole-dipole channel between spherical components of the atomic and molecular dipoles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleChannel {
    pub p_atom: i8,
    pub p_mol: i8,
    /// Transition dipole matrix elements in C·m.
    pub d_atom: f64,
    pub d_mol: f64,
}

fn channel_weight(p_atom: i8, p_mol: i8) -> f64 {
    match (p_atom, p_mol) {
        (0, 0) => 1.0,
        (-1, 1) | (1, -1) => 0.5,
        (1, 1) | (-1, -1) => -1.5,
        _ => 0.0,
    }
}

/// Full resonant coupling `V = 2⟨1r|H_dd|2R⟩` (rad/s, sign kept) summed over channels.
pub fn dd_coupling(channels: &[DipoleChannel], x_am: f64) -> Result<f64> {
    if !(x_am > 0.0) {
        return Err(invalid(format!("x_am must be positive, got {x_am}")));
    }
    let prefactor = 1.0 / (4.0 * PI * EPSILON_0 * x_am.powi(3) * HBAR);
    let mut sum = 0.0;
    for ch in channels {
        if ch.p_atom.abs() > 1 || ch.p_mol.abs() > 1 {
            return Err(invalid(format!("spherical components must be in {{-1, 0, 1}}, got ({}, {})", ch.p_atom, ch.p_mol)));
        }
        sum += channel_weight(ch.p_atom, ch.p_mol) * ch.d_atom * ch.d_mol;
    }
    Ok(2.0 * prefactor * sum)
}

/// Root-sum-square of independent channel couplings.
pub fn combine_channels(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("combine_channels needs at least one value"));
    }
    Ok(values.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Basis bookkeeping for molecule pair ⊗ atoms ⊗ trailing (phonon) space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n_atoms: usize,
    pub atom_levels: usize,
    /// Dimension of the trailing factor (phonons); 1 when absent.
    pub trailing: usize,
}

impl Layout {
    pub fn new(n_atoms: usize, atom_levels: usize) -> Self {
        Self { n_atoms, atom_levels, trailing: 1 }
    }

    pub fn atoms_dim(&self) -> usize {
        self.atom_levels.pow(self.n_atoms as u32)
    }

    pub fn dim(&self) -> usize {
        MOLECULE_LEVELS * MOLECULE_LEVELS * self.atoms_dim() * self.trailing
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        let mut d = vec![MOLECULE_LEVELS, MOLECULE_LEVELS];
        d.extend(std::iter::repeat(self.atom_levels).take(self.n_atoms));
        if self.trailing > 1 {
            d.push(self.trailing);
        }
        d
    }

    /// Index of `|m1 m2; atoms⟩ ⊗ |trailing = 0⟩`.
    pub fn index(&self, m1: usize, m2: usize, atoms: &[usize]) -> usize {
        debug_assert_eq!(atoms.len(), self.n_atoms);
        let mut idx = m1 * MOLECULE_LEVELS + m2;
        for &a in atoms {
            idx = idx * self.atom_levels + a;
        }
        idx * self.trailing
    }

    /// `(m1, m2, atom levels, trailing index)` of a basis index.
    pub fn decompose(&self, mut idx: usize) -> (usize, usize, Vec<usize>, usize) {
        let t = idx % self.trailing;
        idx /= self.trailing;
        let mut atoms = vec![0; self.n_atoms];
        for k in (0..self.n_atoms).rev() {
            atoms[k] = idx % self.atom_levels;
            idx /= self.atom_levels;
        }
        let m2 = idx % MOLECULE_LEVELS;
        let m1 = idx / MOLECULE_LEVELS;
        (m1, m2, atoms, t)
    }

    /// Labels such as `01r` or `10gR` (trailing factor ignored).
    pub fn labels(&self) -> Vec<String> {
        const NAMES: [char; 4] = ['g', 'r', 'R', 'x'];
        (0..self.dim() / self.trailing)
            .map(|i| {
                let (m1, m2, atoms, _) = self.decompose(i * self.trailing);
                let mut s = format!("{m1}{m2}");
                s.extend(atoms.iter().map(|&a| NAMES[a]));
                s
            })
            .collect()
    }

    /// Enumerates every `(m1, m2, atoms)` with the trailing index fixed to 0.
    fn configurations(&self) -> impl Iterator<Item = (usize, usize, Vec<usize>)> + '_ {
        (0..self.dim() / self.trailing).map(move |i| {
            let (m1, m2, atoms, _) = self.decompose(i * self.trailing);
            (m1, m2, atoms)
        })
    }
}

/// Which molecule (0 for molecule 1, 1 for molecule 2) an atom exchanges energy with.
#[derive(Debug, Clone, Copy)]
struct AtomMoleculeLink {
    atom: usize,
    molecule: usize,
    v: f64,
}

fn exchange_triplets(layout: &Layout, link: AtomMoleculeLink) -> Vec<(usize, usize, C64)> {
    // V/2 (|1 r⟩⟨2 R| + h.c.) between the linked molecule and atom.
    let mut t = Vec::new();
    for (m1, m2, atoms) in layout.configurations() {
        let mol = if link.molecule == 0 { m1 } else { m2 };
        if mol == 1 && atoms[link.atom] == atom::r {
            let mut to = atoms.clone();
            to[link.atom] = atom::R;
            let (n1, n2) = if link.molecule == 0 { (2, m2) } else { (m1, 2) };
            let i = layout.index(m1, m2, &atoms);
            let j = layout.index(n1, n2, &to);
            t.push((i, j, C64::new(0.5 * link.v, 0.0)));
            t.push((j, i, C64::new(0.5 * link.v, 0.0)));
        }
    }
    t
}

fn detuning_triplets(layout: &Layout, atom_idx: usize, det: &DetuningSpec) -> Vec<(usize, usize, C64)> {
    let mut t = Vec::new();
    for (m1, m2, atoms) in layout.configurations() {
        let e = match atoms[atom_idx] {
            a if a == atom::r => -det.delta_l,
            a if a == atom::R => det.delta_am - det.delta_l,
            _ => 0.0,
        };
        if e != 0.0 {
            let i = layout.index(m1, m2, &atoms);
            t.push((i, i, C64::new(e, 0.0)));
        }
    }
    t
}

/// `½(|g⟩⟨x| + h.c.)` on one atom; multiplied by `Ω(t)` in the Hamiltonian.
fn drive_triplets(layout: &Layout, atom_idx: usize, upper: usize) -> Vec<(usize, usize, C64)> {
    let mut t = Vec::new();
    for (m1, m2, atoms) in layout.configurations() {
        if atoms[atom_idx] == atom::g {
            let mut to = atoms.clone();
            to[atom_idx] = upper;
            let i = layout.index(m1, m2, &atoms);
            let j = layout.index(m1, m2, &to);
            t.push((i, j, C64::new(0.5, 0.0)));
            t.push((j, i, C64::new(0.5, 0.0)));
        }
    }
    t
}

/// Jump operators `√Γ|lost⟩⟨x|` for `x ∈ {r, R}` on every atom of a layout with sink levels.
pub fn decay_jumps(layout: &Layout, decay: &DecaySpec) -> Result<Vec<SparseOperator>> {
    if layout.atom_levels != ATOM_LEVELS + 1 {
        return Err(invalid("decay jumps need a layout with the lost level"));
    }
    let mut jumps = Vec::new();
    for a in 0..layout.n_atoms {
        for (level, gamma) in [(atom::r, decay.gamma_r), (atom::R, decay.gamma_R)] {
            if gamma == 0.0 {
                continue;
            }
            let mut trip = Vec::new();
            for (m1, m2, atoms) in layout.configurations() {
                if atoms[a] == level {
                    let mut to = atoms.clone();
                    to[a] = atom::lost;
                    trip.push((layout.index(m1, m2, &to), layout.index(m1, m2, &atoms), C64::new(gamma.sqrt(), 0.0)));
                }
            }
            jumps.push(sparse(layout, trip));
        }
    }
    Ok(jumps)
}

fn sparse(layout: &Layout, trip: Vec<(usize, usize, C64)>) -> SparseOperator {
    SparseOperator::from_triplets(layout.dim(), trip).expect("indices generated from the layout")
}

/// Static part and unit-amplitude drive of the single-atom gate Hamiltonian.
pub(crate) fn single_atom_parts(config: &GateConfig, atom_levels: usize) -> (Layout, SparseOperator, SparseOperator) {
    let layout = Layout::new(1, atom_levels);
    let mut stat = detuning_triplets(&layout, 0, &config.detuning);
    stat.extend(exchange_triplets(&layout, AtomMoleculeLink { atom: 0, molecule: 0, v: config.coupling.v_1a }));
    stat.extend(exchange_triplets(&layout, AtomMoleculeLink { atom: 0, molecule: 1, v: config.coupling.v_2a }));
    let drive = drive_triplets(&layout, 0, atom::r);
    (layout, sparse(&layout, stat), sparse(&layout, drive))
}

/// Time-dependent single-atom gate Hamiltonian (sink levels included when decay is on).
/// Single-atom pieces with each atom–molecule exchange split out at unit coupling:
/// `(layout, detuning, [link to molecule 1, link to molecule 2], drive)`.
pub(crate) fn single_atom_components(config: &GateConfig) -> (Layout, SparseOperator, [SparseOperator; 2], SparseOperator) {
    let layout = Layout::new(1, ATOM_LEVELS);
    let det = sparse(&layout, detuning_triplets(&layout, 0, &config.detuning));
    let link = |molecule| sparse(&layout, exchange_triplets(&layout, AtomMoleculeLink { atom: 0, molecule, v: 1.0 }));
    let drive = sparse(&layout, drive_triplets(&layout, 0, atom::r));
    (layout, det, [link(0), link(1)], drive)
}

pub fn gate_hamiltonian(config: &GateConfig) -> Result<(Layout, TimeDependentOperator)> {
    config.validate()?;
    let (layout, stat, drive) = single_atom_parts(config, config.atom_levels());
    let pulse = config.pulse;
    let mut h = TimeDependentOperator::new(layout.dim());
    h.add_constant(stat)?;
    h.add_modulated(Arc::new(move |t| pulse.omega(t)), drive)?;
    Ok((layout, h))
}

/// The 27-dimensional rotating-frame gate Hamiltonian at time `t`.
pub fn build_gate_hamiltonian(config: &GateConfig, t: f64) -> Result<Operator> {
    if !(0.0..=config.pulse.duration).contains(&t) {
        return Err(Error::TimeOutOfRange { t, duration: config.pulse.duration });
    }
    config.validate()?;
    let (_, stat, drive) = single_atom_parts(config, ATOM_LEVELS);
    let h = stat.add(&drive.scale(C64::new(config.pulse.omega(t), 0.0)))?;
    Ok(h.to_operator())
}

/// Mixing angle `θ` with `tan θ = v/Ω`, in `[0, π/2]` for non-negative inputs.
pub fn dark_angle(omega: f64, v: f64) -> f64 {
    v.abs().atan2(omega.abs())
}

/// Sector of a zero-energy (dark) state of the gate Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DarkSector {
    /// `|01g⟩` with `|02R⟩`; `tan θ = V_2A/Ω`.
    Single,
    /// `|10g⟩` with `|20R⟩`; `tan θ = V_1A/Ω`.
    SingleFirst,
    /// `|11g⟩` with `|Ψ⁺⟩ ∝ V_1A|21R⟩ + V_2A|12R⟩`; `tan θ = √(V_1A²+V_2A²)/Ω`.
    Double { v_1a: f64, v_2a: f64 },
}

/// `−sin θ |ground⟩ + cos θ |bright partner⟩` in the 27-dim basis.
pub fn dark_state(theta: f64, sector: DarkSector) -> Result<StateVector> {
    if !(0.0..=PI / 2.0 + 1e-12).contains(&theta) {
        return Err(invalid(format!("theta must lie in [0, pi/2], got {theta}")));
    }
    let layout = Layout::new(1, 3);
    let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
    let (s, c) = theta.sin_cos();
    match sector {
        DarkSector::Single => {
            amps[layout.index(0, 1, &[atom::g])] = C64::new(-s, 0.0);
            amps[layout.index(0, 2, &[atom::R])] = C64::new(c, 0.0);
        }
        DarkSector::SingleFirst => {
            amps[layout.index(1, 0, &[atom::g])] = C64::new(-s, 0.0);
            amps[layout.index(2, 0, &[atom::R])] = C64::new(c, 0.0);
        }
        DarkSector::Double { v_1a, v_2a } => {
            let n = (v_1a * v_1a + v_2a * v_2a).sqrt();
            if n == 0.0 {
                return Err(invalid("double-excitation dark state needs a nonzero coupling"));
            }
            amps[layout.index(1, 1, &[atom::g])] = C64::new(-s, 0.0);
            amps[layout.index(2, 1, &[atom::R])] = C64::new(c * v_1a / n, 0.0);
            amps[layout.index(1, 2, &[atom::R])] = C64::new(c * v_2a / n, 0.0);
        }
    }
    StateVector::new(amps)
}

/// Dark state of a sector at time `t` of the configured pulse.
pub fn dark_state_at(config: &GateConfig, sector: DarkSector, t: f64) -> Result<StateVector> {
    let omega = config.pulse.omega(t);
    let v = match sector {
        DarkSector::Single => config.coupling.v_2a,
        DarkSector::SingleFirst => config.coupling.v_1a,
        DarkSector::Double { v_1a, v_2a } => (v_1a * v_1a + v_2a * v_2a).sqrt(),
    };
    dark_state(dark_angle(omega, v), sector)
}

/// Energies `(0, +½√(Ω²+V²), −½√(Ω²+V²))` of the uncoupled and bright states.
pub fn eigenenergies_uce(omega: f64, v: f64) -> [f64; 3] {
    let e = 0.5 * (omega * omega + v * v).sqrt();
    [0.0, e, -e]
}

/// Laser transition addressed by a pulse segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// `|g⟩ ↔ |r⟩`
    GroundToR,
    /// `|g⟩ ↔ |R⟩`
    GroundToUpperR,
}

/// One pulse applied to one or more atoms starting at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub atoms: Vec<usize>,
    pub transition: Transition,
    pub start: f64,
    pub pulse: PulseSchedule,
}

impl PulseSegment {
    pub fn end(&self) -> f64 {
        self.start + self.pulse.duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    CzSingleAtom,
    CzTwoAtom,
    CzThreeAtom,
    ReadoutStirap,
    InitPumping,
}

/// Multi-atom protocol: pulse sequence plus atom-atom couplings.
///
/// Two-atom: atom 0 sits next to molecule 1, atom 1 next to molecule 2, and `v_rr` shifts `|rr⟩`.
/// Three-atom: atoms 0 and 2 are the outer atoms, atom 1 is central; `v_rr` shifts `|r_0 r_2⟩`
/// and `v_rR` drives `|r R⟩ ↔ |R r⟩` between each outer atom and the central one.
/// An infinite `v_rr` removes the blocked states from the drive entirely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub segments: Vec<PulseSegment>,
    pub v_rr: f64,
    pub v_rR: f64,
}

impl ProtocolSpec {
    /// π on atom 0, 2π on atom 1, π on atom 0.
    pub fn two_atom(t1: f64, t2: f64, v_rr: f64) -> Result<Self> {
        let pi = PulseSchedule::sine_with_area(t1, PI)?;
        let two_pi = PulseSchedule::sine_with_area(t2, 2.0 * PI)?;
        let spec = Self {
            kind: ProtocolKind::CzTwoAtom,
            segments: vec![
                PulseSegment { atoms: vec![0], transition: Transition::GroundToR, start: 0.0, pulse: pi },
                PulseSegment { atoms: vec![1], transition: Transition::GroundToR, start: t1, pulse: two_pi },
                PulseSegment { atoms: vec![0], transition: Transition::GroundToR, start: t1 + t2, pulse: pi },
            ],
            v_rr,
            v_rR: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// π on both outer atoms, 2π on the central `g ↔ R` transition, π on both outer atoms.
    pub fn three_atom(t1: f64, t2: f64, v_rr: f64, v_rR: f64) -> Result<Self> {
        let pi = PulseSchedule::sine_with_area(t1, PI)?;
        let two_pi = PulseSchedule::sine_with_area(t2, 2.0 * PI)?;
        let spec = Self {
            kind: ProtocolKind::CzThreeAtom,
            segments: vec![
                PulseSegment { atoms: vec![0, 2], transition: Transition::GroundToR, start: 0.0, pulse: pi },
                PulseSegment { atoms: vec![1], transition: Transition::GroundToUpperR, start: t1, pulse: two_pi },
                PulseSegment { atoms: vec![0, 2], transition: Transition::GroundToR, start: t1 + t2, pulse: pi },
            ],
            v_rr,
            v_rR,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n_atoms(&self) -> Result<usize> {
        match self.kind {
            ProtocolKind::CzSingleAtom => Ok(1),
            ProtocolKind::CzTwoAtom => Ok(2),
            ProtocolKind::CzThreeAtom => Ok(3),
            k => Err(invalid(format!("{k:?} is not a multi-atom gate protocol"))),
        }
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(PulseSegment::end).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_atoms()?;
        let mut last_end = 0.0;
        for (k, s) in self.segments.iter().enumerate() {
            if !(s.pulse.duration > 0.0) {
                return Err(invalid(format!("segment {k} has non-positive duration")));
            }
            if s.start < last_end - 1e-15 {
                return Err(invalid(format!("segment {k} overlaps the previous segment")));
            }
            if s.atoms.is_empty() || s.atoms.iter().any(|&a| a >= n) {
                return Err(invalid(format!("segment {k} addresses an atom outside 0..{n}")));
            }
            last_end = s.end();
        }
        if self.v_rr < 0.0 || self.v_rR < 0.0 || self.v_rr.is_nan() || !self.v_rR.is_finite() {
            return Err(invalid("v_rr and v_rR must be non-negative (v_rr may be infinite)"));
        }
        Ok(())
    }

    /// The pair of atoms whose `|rr⟩` state carries the van der Waals shift.
    pub fn blockade_pair(&self) -> Option<(usize, usize)> {
        match self.kind {
            ProtocolKind::CzTwoAtom => Some((0, 1)),
            ProtocolKind::CzThreeAtom => Some((0, 2)),
            _ => None,
        }
    }

    /// Atom-molecule links: `(atom, molecule)` pairs.
    fn links(&self) -> Vec<(usize, usize)> {
        match self.kind {
            ProtocolKind::CzSingleAtom => vec![(0, 0), (0, 1)],
            ProtocolKind::CzTwoAtom => vec![(0, 0), (1, 1)],
            ProtocolKind::CzThreeAtom => vec![(0, 0), (2, 1)],
            _ => vec![],
        }
    }
}

/// Time-dependent Hamiltonian for a multi-atom protocol.
pub fn longrange_hamiltonian(config: &GateConfig, protocol: &ProtocolSpec) -> Result<(Layout, TimeDependentOperator)> {
    config.validate()?;
    protocol.validate()?;
    let n_atoms = protocol.n_atoms()?;
    let layout = Layout::new(n_atoms, config.atom_levels());
    let blocked_pair = protocol.blockade_pair();
    let is_blocked = |atoms: &[usize]| match blocked_pair {
        Some((a, b)) => atoms[a] == atom::r && atoms[b] == atom::r,
        None => false,
    };
    let infinite_blockade = protocol.v_rr.is_infinite();

    let mut stat = Vec::new();
    for (atom_idx, mol) in protocol.links() {
        let v = if mol == 0 { config.coupling.v_1a } else { config.coupling.v_2a };
        stat.extend(exchange_triplets(&layout, AtomMoleculeLink { atom: atom_idx, molecule: mol, v }));
        stat.extend(detuning_triplets(&layout, atom_idx, &config.detuning));
    }
    if !infinite_blockade && protocol.v_rr != 0.0 {
        for (m1, m2, atoms) in layout.configurations() {
            if is_blocked(&atoms) {
                let i = layout.index(m1, m2, &atoms);
                stat.push((i, i, C64::new(protocol.v_rr, 0.0)));
            }
        }
    }
    if protocol.kind == ProtocolKind::CzThreeAtom && protocol.v_rR != 0.0 {
        let central = 1;
        for outer in [0usize, 2] {
            for (m1, m2, atoms) in layout.configurations() {
                if atoms[outer] == atom::r && atoms[central] == atom::R {
                    let mut to = atoms.clone();
                    to[outer] = atom::R;
                    to[central] = atom::r;
                    let i = layout.index(m1, m2, &atoms);
                    let j = layout.index(m1, m2, &to);
                    let v = C64::new(0.5 * protocol.v_rR, 0.0);
                    stat.push((i, j, v));
                    stat.push((j, i, v));
                }
            }
        }
    }
    let blocked_index = |i: usize| {
        let (_, _, atoms, _) = layout.decompose(i);
        is_blocked(&atoms)
    };
    let mut h = TimeDependentOperator::new(layout.dim());
    h.add_constant(sparse(&layout, stat))?;
    for seg in &protocol.segments {
        let upper = match seg.transition {
            Transition::GroundToR => atom::r,
            Transition::GroundToUpperR => atom::R,
        };
        let mut trip = Vec::new();
        for &a in &seg.atoms {
            trip.extend(drive_triplets(&layout, a, upper));
        }
        if infinite_blockade {
            trip.retain(|&(i, j, _)| !blocked_index(i) && !blocked_index(j));
        }
        let pulse = seg.pulse;
        let start = seg.start;
        h.add_modulated(Arc::new(move |t| pulse.omega(t - start)), sparse(&layout, trip))?;
    }
    Ok((layout, h))
}

/// The two- or three-atom Hamiltonian at time `t` (dim 81 or 243 without sink levels).
pub fn build_longrange_hamiltonian(config: &GateConfig, protocol: &ProtocolSpec, t: f64) -> Result<Operator> {
    let duration = protocol.duration();
    if !(0.0..=duration).contains(&t) {
        return Err(Error::TimeOutOfRange { t, duration });
    }
    let mut cfg = *config;
    cfg.include_decay = false;
    let (_, h) = longrange_hamiltonian(&cfg, protocol)?;
    Ok(h.at(t).to_operator())
}
