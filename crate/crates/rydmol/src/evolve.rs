//! Time-dependent Hamiltonians and adaptive propagation of kets and density matrices.
//!
//! The integrator is an embedded Dormand-Prince 5(4) pair. Step-size control uses the
//! max-norm of `|err_i| / (tol + tol·max(|y_i|, |y_new_i|))`, and every requested sample
//! time is hit exactly.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::model::{dark_state_at, DarkSector, GateConfig};
use crate::numerics::{DensityMatrix, SparseOperator, StateVector, C64, I, ONE, ZERO};

/// Scalar envelope `f(t)` multiplying one Hamiltonian term.
pub type Envelope = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `H(t) = Σ_k f_k(t) H_k` with sparse terms; constant terms have no envelope.
#[derive(Clone)]
pub struct TimeDependentOperator {
    dim: usize,
    terms: Vec<(Option<Envelope>, SparseOperator)>,
}

impl fmt::Debug for TimeDependentOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentOperator")
            .field("dim", &self.dim)
            .field("terms", &self.terms.len())
            .finish()
    }
}

impl TimeDependentOperator {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check(&self, op: &SparseOperator) -> Result<()> {
        if op.dim() != self.dim {
            return Err(Error::Dimension(format!("term has dim {}, operator has dim {}", op.dim(), self.dim)));
        }
        Ok(())
    }

    pub fn add_constant(&mut self, op: SparseOperator) -> Result<()> {
        self.check(&op)?;
        if op.nnz() > 0 {
            self.terms.push((None, op));
        }
        Ok(())
    }

    pub fn add_modulated(&mut self, envelope: Envelope, op: SparseOperator) -> Result<()> {
        self.check(&op)?;
        if op.nnz() > 0 {
            self.terms.push((Some(envelope), op));
        }
        Ok(())
    }

    /// The sparse operator at time `t`.
    pub fn at(&self, t: f64) -> SparseOperator {
        self.terms.iter().fold(SparseOperator::zeros(self.dim), |acc, (env, op)| {
            let f = env.as_ref().map_or(1.0, |e| e(t));
            if f == 0.0 {
                acc
            } else {
                acc.add(&op.scale(C64::new(f, 0.0))).expect("same dim")
            }
        })
    }

    /// Largest Hermiticity defect of any term relative to its largest entry.
    pub fn relative_hermiticity_defect(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, op)| op.hermiticity_defect() / op.max_abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// `y += alpha H(t) x`.
    pub fn apply_add(&self, t: f64, alpha: C64, x: &[C64], y: &mut [C64]) {
        for (env, op) in &self.terms {
            let f = env.as_ref().map_or(1.0, |e| e(t));
            if f != 0.0 {
                op.apply_add(alpha * f, x, y);
            }
        }
    }

    /// `Y += alpha H(t) X` for a column-major square `X`.
    pub fn apply_add_matrix(&self, t: f64, alpha: C64, x: &[C64], y: &mut [C64]) {
        for (env, op) in &self.terms {
            let f = env.as_ref().map_or(1.0, |e| e(t));
            if f != 0.0 {
                op.apply_add_matrix(alpha * f, x, y);
            }
        }
    }
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    /// Combined absolute/relative tolerance per component.
    pub tol: f64,
    /// Upper bound on the step size in s.
    pub max_step: Option<f64>,
    /// First trial step; defaults to 1% of the first sample interval.
    pub initial_step: Option<f64>,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_step: None, initial_step: None }
    }
}

impl PropagationOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(y: &[C64], h: f64, coeffs: &[(f64, &[C64])], out: &mut [C64]) {
    out.copy_from_slice(y);
    for &(a, k) in coeffs {
        if a != 0.0 {
            let s = h * a;
            for (o, ki) in out.iter_mut().zip(k) {
                *o += s * ki;
            }
        }
    }
}

/// Integrates `dy/dt = f(t, y)` and returns `y` at each entry of `times`.
///
/// `times` must be non-decreasing; `y0` is the state at `times[0]`. The right-hand side
/// writes into a zeroed output buffer.
pub fn integrate<F>(rhs: F, y0: Vec<C64>, times: &[f64], opts: &PropagationOptions) -> Result<Vec<Vec<C64>>>
where
    F: Fn(f64, &[C64], &mut [C64]),
{
    if times.is_empty() {
        return Err(invalid("at least one sample time is required"));
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("sample times must be finite and non-decreasing"));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if let Some(m) = opts.max_step {
        if !(m > 0.0) {
            return Err(invalid(format!("max_step must be positive, got {m}")));
        }
    }
    let n = y0.len();
    let span = times[times.len() - 1] - times[0];
    let scale_t = span.abs().max(times[0].abs()).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(times.len());
    out.push(y0.clone());

    let mut y = y0;
    let mut t = times[0];
    let first_gap = times.windows(2).map(|w| w[1] - w[0]).find(|&d| d > 0.0).unwrap_or(span);
    let mut h = opts.initial_step.unwrap_or(0.01 * first_gap);
    if let Some(m) = opts.max_step {
        h = h.min(m);
    }

    let mut k: [Vec<C64>; 7] = std::array::from_fn(|_| vec![ZERO; n]);
    let mut tmp = vec![ZERO; n];
    let mut y_new = vec![ZERO; n];
    let eval = |t: f64, y: &[C64], out: &mut Vec<C64>| {
        out.iter_mut().for_each(|v| *v = ZERO);
        rhs(t, y, out);
    };
    let mut fsal_valid = false;

    for &target in &times[1..] {
        while t < target {
            let remaining = target - t;
            let mut step = h.min(remaining);
            if let Some(m) = opts.max_step {
                step = step.min(m);
            }
            // Land exactly on the sample when close.
            let last = step >= remaining * (1.0 - 1e-12);
            if last {
                step = remaining;
            }
            if step <= 1e-14 * scale_t {
                return Err(Error::StepUnderflow { t, h: step });
            }
            if !fsal_valid {
                let (k0, _) = k.split_at_mut(1);
                eval(t, &y, &mut k0[0]);
            }
            let [k1, k2, k3, k4, k5, k6, k7] = &mut k;
            combine(&y, step, &[(A21, k1)], &mut tmp);
            eval(t + C2 * step, &tmp, k2);
            combine(&y, step, &[(A31, k1), (A32, k2)], &mut tmp);
            eval(t + C3 * step, &tmp, k3);
            combine(&y, step, &[(A41, k1), (A42, k2), (A43, k3)], &mut tmp);
            eval(t + C4 * step, &tmp, k4);
            combine(&y, step, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], &mut tmp);
            eval(t + C5 * step, &tmp, k5);
            combine(&y, step, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)], &mut tmp);
            eval(t + step, &tmp, k6);
            combine(&y, step, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)], &mut y_new);
            eval(t + step, &y_new, k7);

            let mut err = 0.0_f64;
            for i in 0..n {
                let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = opts.tol + opts.tol * y[i].norm().max(y_new[i].norm());
                let ratio = e.norm() / sc;
                err = if ratio.is_nan() { f64::INFINITY } else { err.max(ratio) };
            }
            let factor = if err == 0.0 { 5.0 } else if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) } else { 0.2 };
            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(k1, k7);
                fsal_valid = true;
                // Keep the controller's step rather than the truncated one when landing on a sample.
                if !last || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(1.0);
                fsal_valid = true;
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// States sampled at a sequence of times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

/// Anything with basis-state populations.
pub trait Populations {
    fn populations(&self) -> Vec<f64>;
}

impl Populations for StateVector {
    fn populations(&self) -> Vec<f64> {
        StateVector::populations(self)
    }
}

impl Populations for DensityMatrix {
    fn populations(&self) -> Vec<f64> {
        DensityMatrix::populations(self)
    }
}

impl<S: Populations> Trajectory<S> {
    pub fn final_state(&self) -> &S {
        self.states.last().expect("trajectories are never empty")
    }

    /// Population of basis state `index` at every sample.
    pub fn population(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.populations()[index]).collect()
    }

    /// Writes `t_s` followed by one population column per label.
    pub fn write_csv<W: Write>(&self, mut w: W, labels: &[String]) -> Result<()> {
        write!(w, "t_s")?;
        for l in labels {
            write!(w, ",P_{l}")?;
        }
        writeln!(w)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(w, "{t:.11e}")?;
            let p = s.populations();
            if p.len() != labels.len() {
                return Err(Error::Dimension(format!("{} labels for {} populations", labels.len(), p.len())));
            }
            for x in p {
                write!(w, ",{x:.11e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(invalid("at least one sample time is required"));
    }
    Ok(())
}

fn check_hermitian(h: &TimeDependentOperator) -> Result<()> {
    let defect = h.relative_hermiticity_defect();
    if defect > 1e-12 {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Solves `i dψ/dt = H(t) ψ` for Hermitian `H(t)` (every term must be Hermitian).
pub fn propagate(h: &TimeDependentOperator, psi0: &StateVector, times: &[f64], opts: &PropagationOptions) -> Result<Trajectory<StateVector>> {
    check_times(times)?;
    check_hermitian(h)?;
    if psi0.dim() != h.dim() {
        return Err(Error::Dimension(format!("state dim {} vs Hamiltonian dim {}", psi0.dim(), h.dim())));
    }
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| h.apply_add(t, -I, y, dy);
    let samples = integrate(rhs, psi0.as_slice().to_vec(), times, opts)?;
    let states = samples
        .into_iter()
        .map(|v| StateVector::from_vector_unchecked(nalgebra::DVector::from_vec(v)))
        .collect();
    Ok(Trajectory { times: times.to_vec(), states })
}

/// Solves `dρ/dt = -i(H_eff ρ - ρ H_eff†) + Σ L ρ L†` with `H_eff = H - (i/2) Σ L†L`.
pub fn propagate_lindblad(
    h: &TimeDependentOperator,
    jumps: &[SparseOperator],
    rho0: &DensityMatrix,
    times: &[f64],
    opts: &PropagationOptions,
) -> Result<Trajectory<DensityMatrix>> {
    check_times(times)?;
    check_hermitian(h)?;
    let n = h.dim();
    if rho0.dim() != n {
        return Err(Error::Dimension(format!("state dim {} vs Hamiltonian dim {}", rho0.dim(), n)));
    }
    let mut loss = SparseOperator::zeros(n);
    for l in jumps {
        if l.dim() != n {
            return Err(Error::Dimension(format!("jump operator dim {} vs {}", l.dim(), n)));
        }
        loss = loss.add(&l.adjoint().matmul(l)?)?;
    }
    let loss = loss.scale(C64::new(-0.5, 0.0));
    let rhs = |t: f64, rho: &[C64], out: &mut [C64]| {
        // A = H_eff ρ, out = -i(A - A†) + Σ L (L ρ)†.
        let mut a = vec![ZERO; n * n];
        h.apply_add_matrix(t, ONE, rho, &mut a);
        loss.apply_add_matrix(I, rho, &mut a);
        for j in 0..n {
            for i in 0..n {
                out[j * n + i] += -I * (a[j * n + i] - a[i * n + j].conj());
            }
        }
        let mut b = vec![ZERO; n * n];
        let mut bd = vec![ZERO; n * n];
        for l in jumps {
            b.iter_mut().for_each(|v| *v = ZERO);
            l.apply_add_matrix(ONE, rho, &mut b);
            for j in 0..n {
                for i in 0..n {
                    bd[j * n + i] = b[i * n + j].conj();
                }
            }
            l.apply_add_matrix(ONE, &bd, out);
        }
    };
    let flat: Vec<C64> = rho0.matrix().as_slice().to_vec();
    let samples = integrate(rhs, flat, times, opts)?;
    let states = samples
        .into_iter()
        .map(|v| DensityMatrix::from_matrix_unchecked(nalgebra::DMatrix::from_vec(n, n, v)))
        .collect();
    Ok(Trajectory { times: times.to_vec(), states })
}

/// `n` equally spaced times covering `[t0, t1]`.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![t0],
        _ => (0..n).map(|k| if k == n - 1 { t1 } else { t0 + (t1 - t0) * k as f64 / (n - 1) as f64 }).collect(),
    }
}

/// `∫ p dt` from samples: composite Simpson on a uniform grid with an odd number of points,
/// the trapezoidal rule otherwise.
pub fn integrated_population(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::Dimension(format!("{} times vs {} values", times.len(), values.len())));
    }
    if times.len() < 2 {
        return Err(invalid("need at least two samples to integrate"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("sample times must be non-decreasing"));
    }
    let n = times.len();
    let h = (times[n - 1] - times[0]) / (n - 1) as f64;
    let uniform = times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(f64::MIN_POSITIVE));
    if uniform && n % 2 == 1 && n >= 3 {
        let mut s = values[0] + values[n - 1];
        for (k, v) in values.iter().enumerate().take(n - 1).skip(1) {
            s += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        Ok(s * h / 3.0)
    } else {
        Ok(times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum())
    }
}

/// The instantaneous dark state of `sector` followed adiabatically through the pulse.
pub fn adiabatic_trajectory(config: &GateConfig, sector: DarkSector, times: &[f64]) -> Result<Trajectory<StateVector>> {
    check_times(times)?;
    let states = times
        .iter()
        .map(|&t| {
            if !(0.0..=config.pulse.duration).contains(&t) {
                return Err(Error::TimeOutOfRange { t, duration: config.pulse.duration });
            }
            dark_state_at(config, sector, t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { times: times.to_vec(), states })
}
