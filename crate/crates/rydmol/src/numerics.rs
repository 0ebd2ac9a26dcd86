//! Complex state and operator algebra shared by every other module.
//!
//! Dense storage uses `nalgebra`; the propagators work on [`SparseOperator`]
//! (compressed rows), which keeps the phonon-coupled problems cheap.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

const NORM_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-9;
const PSD_CLIP: f64 = 1e-6;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entry of `|A - A^dagger|`.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// A normalized ket.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    /// Wraps amplitudes whose norm must already be 1 within 1e-9.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let v = DVector::from_vec(amps);
        let n = v.norm_squared();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm squared {n} differs from 1")));
        }
        Ok(Self { amps: v })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let mut v = DVector::from_vec(amps);
        let n = v.norm();
        if v.is_empty() || n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero or non-finite vector".into()));
        }
        v /= c(n);
        Ok(Self { amps: v })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Dimension(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[index] = ONE;
        Ok(Self { amps: v })
    }

    /// No norm check; used for propagated samples whose drift is bounded by the integrator tolerance.
    pub(crate) fn from_vector_unchecked(amps: DVector<C64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { m: &self.amps * self.amps.adjoint() }
    }
}

/// A density matrix (Hermitian, unit trace, positive semidefinite).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Dimension(format!("density matrix must be square and nonempty, got {}x{}", m.nrows(), m.ncols())));
        }
        let h = hermiticity_defect(&m);
        if h > NORM_TOL {
            return Err(Error::NotHermitian(h));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let lo = min_eigenvalue(&m);
        if lo < -NORM_TOL {
            return Err(Error::NotPositiveSemidefinite(lo));
        }
        Ok(Self { m })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        psi.to_density()
    }

    /// Diagonal mixture of basis states with the given weights (which must sum to 1).
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        let m = DMatrix::from_diagonal(&DVector::from_iterator(weights.len(), weights.iter().map(|&w| c(w))));
        Self::new(m)
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    /// Traces out every factor not listed in `keep` (factor indices into `dims`, any order;
    /// the kept factors stay in their original relative order).
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
        let total: usize = dims.iter().product();
        if total != self.dim() {
            return Err(Error::Dimension(format!("factor dims multiply to {total}, matrix has dim {}", self.dim())));
        }
        if let Some(&k) = keep.iter().find(|&&k| k >= dims.len()) {
            return Err(Error::Dimension(format!("factor index {k} out of range")));
        }
        let mut keep_sorted: Vec<usize> = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        let kept_dim: usize = keep_sorted.iter().map(|&k| dims[k]).product();
        // Per full index: (kept index, traced index).
        let split: Vec<(usize, usize)> = (0..total)
            .map(|mut idx| {
                let mut digits = vec![0usize; dims.len()];
                for f in (0..dims.len()).rev() {
                    digits[f] = idx % dims[f];
                    idx /= dims[f];
                }
                let (mut k, mut t) = (0usize, 0usize);
                for (f, &d) in digits.iter().enumerate() {
                    if keep_sorted.contains(&f) {
                        k = k * dims[f] + d;
                    } else {
                        t = t * dims[f] + d;
                    }
                }
                (k, t)
            })
            .collect();
        let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (i, &(k, t)) in split.iter().enumerate() {
            groups.entry(t).or_default().push((k, i));
        }
        let mut out = DMatrix::from_element(kept_dim, kept_dim, ZERO);
        for members in groups.values() {
            for &(k1, i1) in members {
                for &(k2, i2) in members {
                    out[(k1, k2)] += self.m[(i1, i2)];
                }
            }
        }
        Ok(Self { m: out })
    }
}

/// Dense operator with a cached Hermiticity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: DMatrix<C64>,
    hermitian: bool,
}

impl Operator {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Dimension(format!("operator must be square and nonempty, got {}x{}", m.nrows(), m.ncols())));
        }
        let hermitian = hermiticity_defect(&m) < HERMITIAN_TOL;
        Ok(Self { m, hermitian })
    }

    pub fn from_real(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension(format!("{} entries for a {n}x{n} operator", entries.len())));
        }
        Self::new(DMatrix::from_row_iterator(n, n, entries.iter().map(|&x| c(x))))
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n, n), hermitian: true }
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: DMatrix::from_element(n, n, ZERO), hermitian: true }
    }

    /// Projector onto the span of the listed basis states.
    pub fn projector(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for &i in indices {
            if i >= dim {
                return Err(Error::Dimension(format!("index {i} out of range for dim {dim}")));
            }
            m[(i, i)] = ONE;
        }
        Ok(Self { m, hermitian: true })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.m)
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint(), hermitian: self.hermitian }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<DVector<C64>> {
        if psi.dim() != self.dim() {
            return Err(Error::Dimension(format!("operator dim {} vs state dim {}", self.dim(), psi.dim())));
        }
        Ok(&self.m * psi.amplitudes())
    }

    pub fn scale(&self, s: C64) -> Self {
        Operator::new(&self.m * s).expect("scaling keeps the shape")
    }

    pub fn to_sparse(&self) -> SparseOperator {
        SparseOperator::from_dense(&self.m)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator::new(&self.m + &rhs.m).expect("matching square operators")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator::new(&self.m - &rhs.m).expect("matching square operators")
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator::new(&self.m * &rhs.m).expect("matching square operators")
    }
}

/// Square complex matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl SparseOperator {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and exact zeros dropped.
    pub fn from_triplets<It>(dim: usize, triplets: It) -> Result<Self>
    where
        It: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); dim];
        for (i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::Dimension(format!("entry ({i}, {j}) out of range for dim {dim}")));
            }
            *rows[i].entry(j).or_insert(ZERO) += v;
        }
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for row in rows {
            for (j, v) in row {
                if v != ZERO {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self { dim, indptr, indices, data })
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let trip = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, m[(i, j)]));
        Self::from_triplets(n, trip).expect("indices come from the matrix itself")
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, indptr: vec![0; dim + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, ONE))).expect("diagonal is in range")
    }

    /// Diagonal operator with the given real entries.
    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_triplets(values.len(), values.iter().enumerate().map(|(i, &v)| (i, i, c(v)))).expect("diagonal is in range")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| (self.indptr[i]..self.indptr[i + 1]).map(move |k| (i, self.indices[k], self.data[k])))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        (self.indptr[i]..self.indptr[i + 1]).find(|&k| self.indices[k] == j).map_or(ZERO, |k| self.data[k])
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, ZERO);
        for (i, j, v) in self.iter() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn to_operator(&self) -> Operator {
        Operator::new(self.to_dense()).expect("square by construction")
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(i, j, v)| (j, i, v.conj()))).expect("same dim")
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(i, j, v)| (i, j, v * s))).expect("same dim")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        Self::from_triplets(self.dim, self.iter().chain(other.iter()))
    }

    /// Sparse matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        let mut trip = Vec::new();
        for (i, k, a) in self.iter() {
            for p in other.indptr[k]..other.indptr[k + 1] {
                trip.push((i, other.indices[p], a * other.data[p]));
            }
        }
        Self::from_triplets(self.dim, trip)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let n = other.dim;
        let mut trip = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.iter() {
            for (k, l, b) in other.iter() {
                trip.push((i * n + k, j * n + l, a * b));
            }
        }
        Self::from_triplets(self.dim * n, trip).expect("indices in range by construction")
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        let diff = self.add(&adj.scale(c(-1.0))).expect("same dim");
        diff.data.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// `y += alpha * A x`.
    #[inline]
    pub fn apply_add(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            if acc != ZERO {
                *yi += alpha * acc;
            }
        }
    }

    /// `Y += alpha * A X` for a column-major square matrix `X` of the same dim.
    pub fn apply_add_matrix(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        let n = self.dim;
        for col in 0..n {
            let r = col * n..(col + 1) * n;
            self.apply_add(alpha, &x[r.clone()], &mut y[r]);
        }
    }

    /// Row indices that hold at least one entry.
    pub fn nonzero_rows(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.indptr[i + 1] > self.indptr[i]).collect()
    }
}

/// Serialized as a list of `[re, im]` amplitudes.
impl serde::Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.amps.iter())
    }
}

/// Serialized as a list of rows of `[re, im]` entries.
impl serde::Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        s.collect_seq((0..n).map(|i| (0..n).map(|j| self.m[(i, j)]).collect::<Vec<_>>()))
    }
}

/// Types with a Kronecker product.
pub trait Kron: Sized {
    fn kron(&self, other: &Self) -> Self;
}

impl Kron for StateVector {
    fn kron(&self, other: &Self) -> Self {
        Self { amps: self.amps.kronecker(&other.amps) }
    }
}

impl Kron for Operator {
    fn kron(&self, other: &Self) -> Self {
        Self { m: self.m.kronecker(&other.m), hermitian: self.hermitian && other.hermitian }
    }
}

impl Kron for SparseOperator {
    fn kron(&self, other: &Self) -> Self {
        SparseOperator::kron(self, other)
    }
}

/// Left-to-right Kronecker product of the factors.
pub fn tensor_product<T: Kron + Clone>(factors: &[T]) -> Result<T> {
    let (first, rest) = factors.split_first().ok_or_else(|| Error::Dimension("empty factor list".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, f| acc.kron(f)))
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> DVector<f64> {
    let h = (m + m.adjoint()) * c(0.5);
    h.symmetric_eigenvalues()
}

fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Square root of a positive semidefinite Hermitian matrix.
pub fn psd_sqrt(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let h = (m + m.adjoint()) * c(0.5);
    let eig = h.symmetric_eigen();
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo < -PSD_CLIP {
        return Err(Error::NotPositiveSemidefinite(lo));
    }
    let roots = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&l| c(l.max(0.0).sqrt())));
    let u = &eig.eigenvectors;
    Ok(u * DMatrix::from_diagonal(&roots) * u.adjoint())
}

/// `√λ·v` for the top eigenpair when `m` is rank one to rounding. The general formula takes
/// square roots of rounding-level eigenvalues there and loses about 1e-8.
fn pure_vector(m: &DMatrix<C64>) -> Option<DVector<C64>> {
    let tr = m.trace().re;
    let purity = (m * m).trace().re;
    if (purity - tr * tr).abs() > 1e-12 * tr * tr {
        return None;
    }
    let eig = ((m + m.adjoint()) * c(0.5)).symmetric_eigen();
    let k = eig.eigenvalues.imax();
    Some(eig.eigenvectors.column(k) * c(eig.eigenvalues[k].max(0.0).sqrt()))
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    let lo = min_eigenvalue(sigma.matrix());
    if lo < -PSD_CLIP {
        return Err(Error::NotPositiveSemidefinite(lo));
    }
    if let Some(psi) = pure_vector(rho.matrix()) {
        return Ok(psi.dotc(&(sigma.matrix() * &psi)).re.clamp(0.0, 1.0));
    }
    if let Some(phi) = pure_vector(sigma.matrix()) {
        return Ok(phi.dotc(&(rho.matrix() * &phi)).re.clamp(0.0, 1.0));
    }
    let s = psd_sqrt(rho.matrix())?;
    let inner = &s * sigma.matrix() * &s;
    let eig = hermitian_eigenvalues(&inner);
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo < -PSD_CLIP {
        return Err(Error::NotPositiveSemidefinite(lo));
    }
    let t: f64 = eig.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((t * t).clamp(0.0, 1.0))
}

/// `1 - F(rho_final, rho_target)`.
pub fn gate_error(rho_final: &DensityMatrix, rho_target: &DensityMatrix) -> Result<f64> {
    Ok(1.0 - uhlmann_fidelity(rho_final, rho_target)?)
}

/// `<psi|A|psi>`.
pub fn expectation(op: &Operator, psi: &StateVector) -> Result<C64> {
    let a = op.apply(psi)?;
    Ok(psi.amplitudes().dotc(&a))
}

/// Pauli matrices, handy for tests and examples.
pub mod pauli {
    use super::{Operator, C64, I, ONE, ZERO};
    use nalgebra::DMatrix;

    pub fn x() -> Operator {
        Operator::new(DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])).expect("2x2")
    }

    pub fn y() -> Operator {
        Operator::new(DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])).expect("2x2")
    }

    pub fn z() -> Operator {
        Operator::new(DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, C64::new(-1.0, 0.0)])).expect("2x2")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kron_of_basis_vectors() {
        let a = StateVector::basis(2, 0).unwrap();
        let b = StateVector::basis(2, 1).unwrap();
        let ab = tensor_product(&[a, b]).unwrap();
        assert_eq!(ab.populations(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn identity_kron_identity() {
        let p = tensor_product(&[Operator::identity(2), Operator::identity(3)]).unwrap();
        assert_eq!(p, Operator::identity(6));
    }

    #[test]
    fn double_bit_flip() {
        let xx = tensor_product(&[pauli::x(), pauli::x()]).unwrap();
        let s = StateVector::basis(4, 0).unwrap();
        let out = xx.apply(&s).unwrap();
        assert_eq!(out[3], ONE);
        assert_eq!(out[0], ZERO);
    }

    #[test]
    fn empty_tensor_product_is_an_error() {
        assert!(tensor_product::<Operator>(&[]).is_err());
    }

    #[test]
    fn mixed_vs_pure_fidelity() {
        let rho = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        let sigma = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        assert_relative_eq!(uhlmann_fidelity(&rho, &sigma).unwrap(), 0.3, epsilon = 1e-12);
        assert_relative_eq!(uhlmann_fidelity(&sigma, &rho).unwrap(), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_and_identical_states() {
        let a = StateVector::basis(2, 0).unwrap().to_density();
        let b = StateVector::basis(2, 1).unwrap().to_density();
        assert_relative_eq!(gate_error(&a, &b).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(gate_error(&a, &a).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn non_psd_input_rejected() {
        let bad = DensityMatrix::from_matrix_unchecked(DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.1), c(-0.1)])));
        let good = DensityMatrix::diagonal(&[0.5, 0.5]).unwrap();
        assert!(matches!(uhlmann_fidelity(&bad, &good), Err(Error::NotPositiveSemidefinite(_))));
        assert!(DensityMatrix::new(bad.matrix().clone()).is_err());
    }

    #[test]
    fn expectation_values() {
        let plus = StateVector::normalized(vec![ONE, ONE]).unwrap();
        assert_relative_eq!(expectation(&pauli::z(), &plus).unwrap().re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(expectation(&Operator::identity(2), &plus).unwrap().re, 1.0, epsilon = 1e-15);
        let p1 = Operator::projector(2, &[1]).unwrap();
        let zero = StateVector::basis(2, 0).unwrap();
        assert_eq!(expectation(&p1, &zero).unwrap(), ZERO);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let a = StateVector::normalized(vec![ONE, c(2.0)]).unwrap();
        let b = StateVector::normalized(vec![c(1.0), c(0.0), c(1.0)]).unwrap();
        let ab = a.kron(&b).to_density();
        let ra = ab.partial_trace(&[2, 3], &[0]).unwrap();
        assert!((ra.matrix() - a.to_density().matrix()).norm() < 1e-12);
        let rb = ab.partial_trace(&[2, 3], &[1]).unwrap();
        assert!((rb.matrix() - b.to_density().matrix()).norm() < 1e-12);
    }

    #[test]
    fn sparse_matches_dense() {
        let op = tensor_product(&[pauli::x(), pauli::y()]).unwrap();
        let sp = op.to_sparse();
        assert_eq!(sp.to_dense(), *op.matrix());
        let x: Vec<C64> = (0..4).map(|k| C64::new(k as f64, 1.0)).collect();
        let mut y = vec![ZERO; 4];
        sp.apply_add(ONE, &x, &mut y);
        let dense = op.matrix() * DVector::from_vec(x);
        for k in 0..4 {
            assert!((y[k] - dense[k]).norm() < 1e-14);
        }
        assert!(sp.hermiticity_defect() < 1e-15);
        let sq = sp.matmul(&sp).unwrap();
        assert!((sq.to_dense() - op.matrix() * op.matrix()).norm() < 1e-14);
    }
}
