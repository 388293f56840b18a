//! Dense complex linear algebra for small multi-qubit spaces.
//!
//! Everything here is stored densely as `nalgebra` matrices of `Complex64`.
//! The three value types ([`StateVector`], [`DensityMatrix`], [`Operator`])
//! check their invariants on construction and are immutable afterwards.

use std::sync::RwLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Process-wide numeric settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericConfig {
    /// Absolute tolerance used by every invariant check.
    pub tol: f64,
    /// Largest number of messages `enumerate_messages` will produce.
    pub enumeration_cap: usize,
    /// Largest message length (in qubits) accepted by the dense routines.
    pub max_qubits: usize,
}

impl NumericConfig {
    pub const DEFAULT: NumericConfig = NumericConfig {
        tol: 1e-10,
        enumeration_cap: 1 << 20,
        max_qubits: 12,
    };
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self::DEFAULT
    }
}

static CONFIG: RwLock<NumericConfig> = RwLock::new(NumericConfig::DEFAULT);

pub fn numeric_config() -> NumericConfig {
    *CONFIG.read().unwrap_or_else(|e| e.into_inner())
}

pub fn set_numeric_config(cfg: NumericConfig) {
    *CONFIG.write().unwrap_or_else(|e| e.into_inner()) = cfg;
}

fn tol() -> f64 {
    numeric_config().tol
}

/// Kronecker product.
pub trait Tensor<Rhs = Self> {
    type Output;
    fn tensor(&self, rhs: &Rhs) -> Self::Output;
}

/// A normalized ket on a `2^k`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
}

impl StateVector {
    /// Normalizes `amps`; fails on a zero vector or a non power-of-two length.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        Self::from_vector(CVector::from_vec(amps))
    }

    pub fn from_vector(amps: CVector) -> Result<Self> {
        check_pow2(amps.len())?;
        let norm = amps.norm();
        if norm <= tol() {
            return Err(Error::Invariant("cannot normalize a zero vector".into()));
        }
        Ok(Self { amps: amps / C64::from(norm) })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| C64::from(a)).collect())
    }

    /// Computational basis ket `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_pow2(dim)?;
        if index >= dim {
            return Err(Error::OutOfRange(format!("basis index {index} >= {dim}")));
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = ONE;
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &CVector {
        &self.amps
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `⟨self|m|self⟩`
    pub fn expectation(&self, m: &CMatrix) -> Result<C64> {
        check_dim(self.dim(), m.nrows())?;
        Ok(self.amps.dotc(&(m * &self.amps)))
    }

    pub fn outer(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { m: self.outer() }
    }

    /// Applies a unitary and returns the rotated ket.
    pub fn evolve(&self, u: &Operator) -> Result<StateVector> {
        check_dim(self.dim(), u.dim())?;
        StateVector::from_vector(u.matrix() * &self.amps)
    }
}

impl Tensor for StateVector {
    type Output = StateVector;
    fn tensor(&self, rhs: &StateVector) -> StateVector {
        StateVector { amps: self.amps.kronecker(&rhs.amps) }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates the matrix and stores its Hermitian part.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Invariant("density matrix must be square and nonempty".into()));
        }
        let t = tol();
        if hermitian_defect(&m) > t {
            return Err(Error::Invariant("density matrix is not Hermitian".into()));
        }
        let m = hermitize(&m);
        let tr = m.trace().re;
        if (tr - 1.0).abs() > t {
            return Err(Error::Invariant(format!("density matrix trace is {tr}")));
        }
        let min = hermitian_eigenvalues(&m).into_iter().fold(f64::INFINITY, f64::min);
        if min < -t {
            return Err(Error::Invariant(format!("density matrix has eigenvalue {min}")));
        }
        Ok(Self { m })
    }

    /// Hermitizes `(A + A†)/2` before validating; used after channel arithmetic.
    pub fn from_channel_output(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Invariant("density matrix must be square".into()));
        }
        Self::new(hermitize(&m))
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        let d = CVector::from_iterator(probs.len(), probs.iter().map(|&p| C64::from(p)));
        Self::new(CMatrix::from_diagonal(&d))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::from_diagonal(&vec![1.0 / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.m)
    }

    /// Conjugation `U ρ U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<DensityMatrix> {
        check_dim(self.dim(), u.ncols())?;
        DensityMatrix::from_channel_output(u * &self.m * u.adjoint())
    }
}

impl Tensor for DensityMatrix {
    type Output = DensityMatrix;
    fn tensor(&self, rhs: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { m: self.m.kronecker(&rhs.m) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Unitary,
    Projector,
    Hermitian,
    General,
}

/// Square operator tagged with the structural property it was checked for.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: CMatrix,
    kind: OperatorKind,
}

impl Operator {
    pub fn new(m: CMatrix, kind: OperatorKind) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Invariant("operator must be square and nonempty".into()));
        }
        let t = tol();
        match kind {
            OperatorKind::Unitary => {
                let d = m.nrows();
                let defect = (m.adjoint() * &m - CMatrix::identity(d, d)).camax();
                if defect > t {
                    return Err(Error::Invariant(format!("operator is not unitary (defect {defect:e})")));
                }
            }
            OperatorKind::Projector => {
                if hermitian_defect(&m) > t || (&m * &m - &m).camax() > t {
                    return Err(Error::Invariant("operator is not an orthogonal projector".into()));
                }
            }
            OperatorKind::Hermitian => {
                if hermitian_defect(&m) > t {
                    return Err(Error::Invariant("operator is not Hermitian".into()));
                }
            }
            OperatorKind::General => {}
        }
        let m = match kind {
            OperatorKind::Projector | OperatorKind::Hermitian => hermitize(&m),
            _ => m,
        };
        Ok(Self { m, kind })
    }

    pub fn unitary(m: CMatrix) -> Result<Self> {
        Self::new(m, OperatorKind::Unitary)
    }

    pub fn projector(m: CMatrix) -> Result<Self> {
        Self::new(m, OperatorKind::Projector)
    }

    pub fn hermitian(m: CMatrix) -> Result<Self> {
        Self::new(m, OperatorKind::Hermitian)
    }

    pub fn general(m: CMatrix) -> Result<Self> {
        Self::new(m, OperatorKind::General)
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim), kind: OperatorKind::Unitary }
    }

    pub fn pauli_x() -> Self {
        Self {
            m: CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            kind: OperatorKind::Unitary,
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            m: CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
            kind: OperatorKind::Unitary,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn adjoint(&self) -> Operator {
        Operator { m: self.m.adjoint(), kind: self.kind }
    }

    /// `1 - P` for a projector `P`.
    pub fn complement(&self) -> Result<Operator> {
        if self.kind != OperatorKind::Projector {
            return Err(Error::Invariant("complement is only defined for projectors".into()));
        }
        let d = self.dim();
        Ok(Operator { m: CMatrix::identity(d, d) - &self.m, kind: OperatorKind::Projector })
    }
}

impl Tensor for Operator {
    type Output = Operator;
    fn tensor(&self, rhs: &Operator) -> Operator {
        use OperatorKind::*;
        let kind = match (self.kind, rhs.kind) {
            (Unitary, Unitary) => Unitary,
            (Projector, Projector) => Projector,
            (Projector | Hermitian, Projector | Hermitian) => Hermitian,
            _ => General,
        };
        Operator { m: self.m.kronecker(&rhs.m), kind }
    }
}

/// `n`-fold tensor power of a matrix; `n = 0` gives the 1x1 identity.
pub fn kron_power(m: &CMatrix, n: usize) -> CMatrix {
    (0..n).fold(CMatrix::identity(1, 1), |acc, _| acc.kronecker(m))
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::from(0.5)
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).camax()
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending and
/// eigenvectors in the matching columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = nalgebra::SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = nalgebra::SymmetricEigen::new(hermitize(m)).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|l| l.abs()).sum()
}

/// `-Σ λ log λ` in the given base, with `0 log 0 = 0`.
pub fn spectral_entropy(eigenvalues: &[f64], base: f64) -> f64 {
    let ln_base = base.ln();
    -eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.ln() / ln_base)
        .sum::<f64>()
}

/// Reduced matrix on the subsystems in `keep` (sorted ascending, order of the
/// output follows the original ordering). Works for any square matrix, not
/// only states.
pub fn partial_trace_matrix(m: &CMatrix, keep: &[usize], dims: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.nrows() != total {
        return Err(Error::DimensionMismatch { expected: total, got: m.nrows() });
    }
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("keep set is empty".into()));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || *keep_sorted.last().unwrap() >= dims.len() {
        return Err(Error::InvalidSubsystems(format!("keep {keep:?} for {} subsystems", dims.len())));
    }
    let is_kept: Vec<bool> = (0..dims.len()).map(|i| keep_sorted.contains(&i)).collect();
    let kept_dim: usize = keep_sorted.iter().map(|&i| dims[i]).product();
    let traced_dim = total / kept_dim;

    // full index -> (kept index, traced index), row-major over subsystems
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(kept_dim); traced_dim];
    for full in 0..total {
        let mut rem = full;
        let (mut k, mut kstride, mut t, mut tstride) = (0, 1, 0, 1);
        for sub in (0..dims.len()).rev() {
            let digit = rem % dims[sub];
            rem /= dims[sub];
            if is_kept[sub] {
                k += digit * kstride;
                kstride *= dims[sub];
            } else {
                t += digit * tstride;
                tstride *= dims[sub];
            }
        }
        groups[t].push((k, full));
    }

    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for group in &groups {
        for &(k1, f1) in group {
            for &(k2, f2) in group {
                out[(k1, k2)] += m[(f1, f2)];
            }
        }
    }
    Ok(out)
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize], dims: &[usize]) -> Result<DensityMatrix> {
    DensityMatrix::from_channel_output(partial_trace_matrix(rho.matrix(), keep, dims)?)
}

/// `F(σ, |ψ⟩) = ⟨ψ|σ|ψ⟩`.
pub fn fidelity_pure_mixed(psi: &StateVector, sigma: &DensityMatrix) -> Result<f64> {
    Ok(psi.expectation(sigma.matrix())?.re)
}

/// How eigenvalues at `-1` are handled when taking a unitary's logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchCut {
    /// Reject eigenvalues at `-1`.
    Reject,
    /// Assign them the eigenphase `+π`, closing the interval `(-π, π]`.
    ClosedAtPi,
}

/// Hermitian `H` with `exp(-iH) = u`, eigenphases in `(-π, π)`.
pub fn matrix_log_principal(u: &Operator) -> Result<Operator> {
    log_unitary(u, BranchCut::Reject)
}

/// Like [`matrix_log_principal`] but eigenvalues at `-1` get phase `π`
/// (energy `-π`), so every unitary has a generator.
pub fn unitary_generator(u: &Operator) -> Result<Operator> {
    log_unitary(u, BranchCut::ClosedAtPi)
}

pub fn log_unitary(u: &Operator, cut: BranchCut) -> Result<Operator> {
    if u.kind() != OperatorKind::Unitary {
        return Err(Error::Invariant("logarithm requires a unitary operator".into()));
    }
    let (eigs, q) = unitary_eigen(u.matrix())?;
    let t = tol();
    let mut energies = Vec::with_capacity(eigs.len());
    for z in eigs {
        let phase = if (z + ONE).norm() <= t.max(1e-12) {
            match cut {
                BranchCut::Reject => return Err(Error::BranchAmbiguity),
                BranchCut::ClosedAtPi => std::f64::consts::PI,
            }
        } else {
            z.arg()
        };
        energies.push(C64::from(-phase));
    }
    let d = CMatrix::from_diagonal(&CVector::from_vec(energies));
    Operator::hermitian(hermitize(&(&q * d * q.adjoint())))
}

/// Eigenvalues and an orthonormal eigenbasis of a unitary via complex Schur.
fn unitary_eigen(u: &CMatrix) -> Result<(Vec<C64>, CMatrix)> {
    let (q, t) = nalgebra::Schur::new(u.clone()).unpack();
    let n = t.nrows();
    let mut off = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                off = off.max(t[(r, c)].norm());
            }
        }
    }
    if off > 1e-8 {
        return Err(Error::Invariant(format!("Schur form of unitary not diagonal ({off:e})")));
    }
    let eigs = (0..n).map(|i| t[(i, i)] / C64::from(t[(i, i)].norm())).collect();
    Ok((eigs, q))
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn exp_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, v) = hermitian_eigen(h);
    let phases = CVector::from_iterator(vals.len(), vals.iter().map(|&e| C64::from_polar(1.0, -e * t)));
    &v * CMatrix::from_diagonal(&phases) * v.adjoint()
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

pub(crate) fn check_pow2(dim: usize) -> Result<()> {
    if dim == 0 || !dim.is_power_of_two() {
        Err(Error::NotPowerOfTwo(dim))
    } else {
        Ok(())
    }
}

/// Number of qubits for a power-of-two dimension.
pub fn qubit_count(dim: usize) -> Result<usize> {
    check_pow2(dim)?;
    Ok(dim.trailing_zeros() as usize)
}
