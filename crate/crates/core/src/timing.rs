//! Imperfect clocks: Gaussian tick noise on the encoding and decoding stages.
//!
//! A stage that runs `exp(-iHt)` for a random duration `t ~ N(τ, σ²)`
//! multiplies the coherence between energy levels `j, k` by
//! `e^{-iΔE τ} e^{-σ²ΔE²/2}`. Encoding and decoding use independent ticks;
//! the deterministic phases cancel and the two damping factors combine into
//! `e^{-σ²ΔE²}`, the double-dephasing kernel.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::coding::EncodingPlan;
use crate::error::{Error, Result};
use crate::linalg::{
    exp_hermitian, fidelity_pure_mixed, hermitian_defect, hermitian_eigen, numeric_config, unitary_generator,
    CMatrix, CVector, DensityMatrix, Operator, StateVector, C64,
};
use crate::source::TypicalSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockSpec {
    /// Mean tick duration.
    pub tau: f64,
    /// Tick standard deviation.
    pub sigma: f64,
}

impl ClockSpec {
    pub fn new(tau: f64, sigma: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::OutOfRange(format!("tick duration {tau} must be positive")));
        }
        if !(sigma >= 0.0) {
            return Err(Error::OutOfRange(format!("tick deviation {sigma} must be >= 0")));
        }
        Ok(Self { tau, sigma })
    }

    /// Unit tick with deviation `sigma`.
    pub fn with_sigma(sigma: f64) -> Result<Self> {
        Self::new(1.0, sigma)
    }
}

/// Hamiltonian `H_f` driving the encoding, kept in its eigenbasis.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    hamiltonian: CMatrix,
    energies: Vec<f64>,
    basis: CMatrix,
}

impl GeneratorSpec {
    pub fn from_hamiltonian(h: &CMatrix) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::DimensionMismatch { expected: h.nrows(), got: h.ncols() });
        }
        let defect = hermitian_defect(h);
        if defect > numeric_config().tol {
            return Err(Error::Invariant(format!("generator not Hermitian (defect {defect:e})")));
        }
        let (energies, basis) = hermitian_eigen(h);
        Ok(Self { hamiltonian: h.clone(), energies, basis })
    }

    /// Diagonal `H_f = Σ E_j |j⟩⟨j|` in the computational basis.
    pub fn from_energies(energies: &[f64]) -> Result<Self> {
        let diag = CVector::from_iterator(energies.len(), energies.iter().map(|&e| C64::from(e)));
        Self::from_hamiltonian(&CMatrix::from_diagonal(&diag))
    }

    /// `H_f` with `exp(-iH_f τ) = U`; eigenvalues `-1` are taken at phase `π`.
    pub fn from_unitary(u: &Operator, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::OutOfRange(format!("tick duration {tau} must be positive")));
        }
        let h = unitary_generator(u)?.into_matrix() / C64::from(tau);
        Self::from_hamiltonian(&h)
    }

    pub fn from_plan(plan: &EncodingPlan, clock: &ClockSpec) -> Result<Self> {
        Self::from_unitary(&plan.unitary, clock.tau)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Column `j` is the eigenvector with energy `E_j`.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Coordinates `⟨j|v⟩` in the energy eigenbasis.
    fn coords(&self, v: &CVector) -> CVector {
        self.basis.adjoint() * v
    }
}

/// Kernel `K_jk = e^{-σ²(E_k - E_j)²}`.
pub fn dephase_matrix(gen: &GeneratorSpec, clock: &ClockSpec) -> DMatrix<f64> {
    let e = gen.energies();
    let s2 = clock.sigma * clock.sigma;
    DMatrix::from_fn(e.len(), e.len(), |j, k| {
        let gap = e[k] - e[j];
        if gap == 0.0 {
            1.0
        } else {
            (-s2 * gap * gap).exp()
        }
    })
}

fn dephase_raw(m: &CMatrix, gen: &GeneratorSpec, clock: &ClockSpec) -> CMatrix {
    let v = gen.basis();
    let mut in_basis = v.adjoint() * m * v;
    let kernel = dephase_matrix(gen, clock);
    in_basis.zip_apply(&kernel, |z, k| *z *= k);
    v * in_basis * v.adjoint()
}

/// Multiplies every coherence in the `H_f` eigenbasis by the double-dephasing kernel.
pub fn double_dephase(rho: &DensityMatrix, gen: &GeneratorSpec, clock: &ClockSpec) -> Result<DensityMatrix> {
    if rho.dim() != gen.dim() {
        return Err(Error::DimensionMismatch { expected: gen.dim(), got: rho.dim() });
    }
    DensityMatrix::from_channel_output(dephase_raw(rho.matrix(), gen, clock))
}

fn check_dims(message: &StateVector, spec: &TypicalSpec, gen: &GeneratorSpec) -> Result<()> {
    if message.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: message.dim() });
    }
    if gen.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: gen.dim() });
    }
    Ok(())
}

/// `Σ_{j,k} K_jk ⟨k|ψ⟩⟨ψ|j⟩ ⟨ψ|P|k⟩⟨j|P|ψ⟩` for a projector `P`.
fn kernel_sum(message: &StateVector, proj: &CMatrix, gen: &GeneratorSpec, clock: &ClockSpec) -> f64 {
    let a = gen.coords(message.amps());
    let b = gen.coords(&(proj * message.amps()));
    let kernel = dephase_matrix(gen, clock);
    let d = gen.dim();
    let mut acc = C64::from(0.0);
    for j in 0..d {
        let left = a[j].conj() * b[j];
        for k in 0..d {
            acc += left * a[k] * b[k].conj() * kernel[(j, k)];
        }
    }
    acc.re
}

/// Typical-branch fidelity after encoding and decoding with noisy clocks, as a double sum.
pub fn clock_limited_fidelity(
    message: &StateVector,
    spec: &TypicalSpec,
    gen: &GeneratorSpec,
    clock: &ClockSpec,
) -> Result<f64> {
    check_dims(message, spec, gen)?;
    Ok(kernel_sum(message, spec.projector.matrix(), gen, clock))
}

/// Same quantity through the channel: `⟨ψ| D(ΛψψΛ) |ψ⟩`.
pub fn clock_limited_fidelity_pipeline(
    message: &StateVector,
    spec: &TypicalSpec,
    gen: &GeneratorSpec,
    clock: &ClockSpec,
) -> Result<f64> {
    check_dims(message, spec, gen)?;
    let projected = spec.projector.matrix() * message.amps();
    let dephased = dephase_raw(&(&projected * projected.adjoint()), gen, clock);
    Ok(message.expectation(&dephased)?.re)
}

/// Thermal probe and noisy clocks together:
/// `C·F_K(Λ) + (1-C)·F_K(Λ^⊥) + (C⟨Λ^⊥⟩ + (1-C)⟨Λ⟩)|⟨ψ_G|ψ⟩|²`,
/// where `F_K(P)` is the kernel sum for the branch that was encoded.
pub fn clock_limited_fidelity_full(
    message: &StateVector,
    spec: &TypicalSpec,
    gen: &GeneratorSpec,
    clock: &ClockSpec,
    c_max: f64,
    guess: &StateVector,
) -> Result<f64> {
    check_dims(message, spec, gen)?;
    check_c_max(c_max)?;
    let x = spec.typical_weight(message)?;
    let perp = spec.complement().into_matrix();
    let typical = kernel_sum(message, spec.projector.matrix(), gen, clock);
    let atypical = kernel_sum(message, &perp, gen, clock);
    let g = guess.inner(message)?.norm_sqr();
    Ok(c_max * typical + (1.0 - c_max) * atypical + (c_max * (1.0 - x) + (1.0 - c_max) * x) * g)
}

/// Received state for the combined model, built explicitly.
pub fn received_state_with_clocks(
    message: &StateVector,
    spec: &TypicalSpec,
    gen: &GeneratorSpec,
    clock: &ClockSpec,
    c_max: f64,
    guess: &StateVector,
) -> Result<DensityMatrix> {
    check_dims(message, spec, gen)?;
    check_c_max(c_max)?;
    let x = spec.typical_weight(message)?;
    let inside = spec.projector.matrix() * message.amps();
    let outside = message.amps() - &inside;
    let measured =
        &inside * inside.adjoint() * C64::from(c_max) + &outside * outside.adjoint() * C64::from(1.0 - c_max);
    let m = dephase_raw(&measured, gen, clock) + guess.outer() * C64::from(c_max * (1.0 - x) + (1.0 - c_max) * x);
    DensityMatrix::from_channel_output(m)
}

pub fn clock_limited_fidelity_full_pipeline(
    message: &StateVector,
    spec: &TypicalSpec,
    gen: &GeneratorSpec,
    clock: &ClockSpec,
    c_max: f64,
    guess: &StateVector,
) -> Result<f64> {
    let rho = received_state_with_clocks(message, spec, gen, clock, c_max, guess)?;
    fidelity_pure_mixed(message, &rho)
}

fn check_c_max(c_max: f64) -> Result<()> {
    let t = numeric_config().tol;
    if !(0.5 - t..=1.0 + t).contains(&c_max) {
        return Err(Error::OutOfRange(format!("C_Max = {c_max} outside [1/2, 1]")));
    }
    Ok(())
}

/// Gauss–Hermite nodes and weights for `∫ e^{-x²} f(x) dx` (Golub–Welsch).
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(order, order, |i, j| {
        if i + 1 == j {
            (j as f64 / 2.0).sqrt()
        } else if j + 1 == i {
            (i as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|i| (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Averages `exp(∓iHt) ρ exp(±iHt)` over `t ~ N(τ, σ²)` by quadrature;
/// `forward = false` runs the decoding direction.
pub fn tick_average(rho: &CMatrix, gen: &GeneratorSpec, clock: &ClockSpec, order: usize, forward: bool) -> CMatrix {
    let (nodes, weights) = gauss_hermite(order);
    let norm = std::f64::consts::PI.sqrt();
    let sign = if forward { 1.0 } else { -1.0 };
    let mut acc = CMatrix::zeros(rho.nrows(), rho.ncols());
    for (x, w) in nodes.iter().zip(&weights) {
        let t = clock.tau + std::f64::consts::SQRT_2 * clock.sigma * x;
        let u = exp_hermitian(gen.hamiltonian(), sign * t);
        acc += (&u * rho * u.adjoint()) * C64::from(w / norm);
    }
    acc
}

/// Encode then decode, each stage averaged over its own tick: reproduces
/// [`double_dephase`] without using the kernel.
pub fn two_stage_tick_average(rho: &DensityMatrix, gen: &GeneratorSpec, clock: &ClockSpec, order: usize) -> CMatrix {
    let encoded = tick_average(rho.matrix(), gen, clock, order, true);
    tick_average(&encoded, gen, clock, order, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{guess_state, protocol_fidelity_ideal, CodingSetup, PlanOptions};
    use crate::source::{enumerate_messages, four_string_epsilon, QubitSource};
    use approx::assert_abs_diff_eq;

    fn setup() -> CodingSetup {
        let src = QubitSource::zero_plus();
        let eps = four_string_epsilon(&src).unwrap();
        CodingSetup::new(src, 3, eps, &PlanOptions::default()).unwrap()
    }

    #[test]
    fn kernel_example() {
        let gen = GeneratorSpec::from_energies(&[0.0, 2.0]).unwrap();
        let clock = ClockSpec::with_sigma(0.5).unwrap();
        let k = dephase_matrix(&gen, &clock);
        assert_abs_diff_eq!(k[(0, 1)], (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(k[(0, 1)], 0.367_879_441_171_442_3, epsilon = 1e-15);
        assert_eq!(k[(1, 1)], 1.0);
    }

    #[test]
    fn zero_sigma_is_identity() {
        let s = setup();
        let gen = GeneratorSpec::from_plan(&s.plan, &ClockSpec::with_sigma(0.0).unwrap()).unwrap();
        let rho = enumerate_messages(&s.source, 3).unwrap().messages[3].0.to_density();
        let out = double_dephase(&rho, &gen, &ClockSpec::with_sigma(0.0).unwrap()).unwrap();
        assert!((out.matrix() - rho.matrix()).camax() < 1e-12);
    }

    #[test]
    fn large_sigma_is_diagonal_in_energy_basis() {
        let gen = GeneratorSpec::from_energies(&[0.0, 1.0, 3.0, 6.0]).unwrap();
        let psi = StateVector::from_real(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        let out = double_dephase(&psi.to_density(), &gen, &ClockSpec::with_sigma(6.0).unwrap()).unwrap();
        let mut off = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    off = off.max(out.matrix()[(r, c)].norm());
                }
            }
        }
        assert!(off < 1e-12);
    }

    #[test]
    fn degenerate_levels_keep_coherence() {
        let gen = GeneratorSpec::from_energies(&[1.0, 1.0]).unwrap();
        let psi = StateVector::from_real(&[1.0, 1.0]).unwrap();
        let out = double_dephase(&psi.to_density(), &gen, &ClockSpec::with_sigma(10.0).unwrap()).unwrap();
        assert!((out.matrix() - psi.outer()).camax() < 1e-14);
    }

    #[test]
    fn generator_reproduces_encoding_unitary() {
        let s = setup();
        let gen = GeneratorSpec::from_plan(&s.plan, &ClockSpec::with_sigma(0.0).unwrap()).unwrap();
        let u = exp_hermitian(gen.hamiltonian(), 1.0);
        assert!((u - s.plan.unitary.matrix()).camax() < 1e-9);
    }

    #[test]
    fn sum_matches_pipeline_and_ideal_limit() {
        let s = setup();
        let guess = guess_state(&s.source, 3);
        for sigma in [0.0, 0.1, 0.5, 1.0] {
            let clock = ClockSpec::with_sigma(sigma).unwrap();
            let gen = GeneratorSpec::from_plan(&s.plan, &clock).unwrap();
            for (psi, _) in &s.ensemble().unwrap().messages {
                let a = clock_limited_fidelity(psi, &s.spec, &gen, &clock).unwrap();
                let b = clock_limited_fidelity_pipeline(psi, &s.spec, &gen, &clock).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
                let c = clock_limited_fidelity_full(psi, &s.spec, &gen, &clock, 0.8, &guess).unwrap();
                let d = clock_limited_fidelity_full_pipeline(psi, &s.spec, &gen, &clock, 0.8, &guess).unwrap();
                assert_abs_diff_eq!(c, d, epsilon = 1e-10);
                if sigma == 0.0 {
                    let x = s.spec.typical_weight(psi).unwrap();
                    assert_abs_diff_eq!(a, x * x, epsilon = 1e-12);
                    let full = clock_limited_fidelity_full(psi, &s.spec, &gen, &clock, 1.0, &guess).unwrap();
                    assert_abs_diff_eq!(full, protocol_fidelity_ideal(psi, &s.spec, &guess).unwrap(), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn energy_eigenket_is_insensitive_to_sigma() {
        let gen = GeneratorSpec::from_energies(&[0.0, 0.5, 1.5, 2.0, 3.0, 4.0, 5.5, 7.0]).unwrap();
        let s = setup();
        let psi = StateVector::basis(8, 0).unwrap();
        let base = clock_limited_fidelity(&psi, &s.spec, &gen, &ClockSpec::with_sigma(0.0).unwrap()).unwrap();
        for sigma in [0.3, 1.0, 4.0] {
            let f = clock_limited_fidelity(&psi, &s.spec, &gen, &ClockSpec::with_sigma(sigma).unwrap()).unwrap();
            assert_abs_diff_eq!(f, base, epsilon = 1e-14);
        }
    }

    #[test]
    fn gauss_hermite_moments() {
        let (x, w) = gauss_hermite(20);
        let pi = std::f64::consts::PI;
        assert_abs_diff_eq!(w.iter().sum::<f64>(), pi.sqrt(), epsilon = 1e-12);
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert_abs_diff_eq!(m2, pi.sqrt() / 2.0, epsilon = 1e-12);
        // ∫ e^{-x²} cos(x) = √π e^{-1/4}
        let c: f64 = x.iter().zip(&w).map(|(x, w)| w * x.cos()).sum();
        assert_abs_diff_eq!(c, pi.sqrt() * (-0.25f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn two_independent_stages_give_double_kernel() {
        let s = setup();
        let clock = ClockSpec::with_sigma(0.3).unwrap();
        let gen = GeneratorSpec::from_plan(&s.plan, &clock).unwrap();
        let rho = enumerate_messages(&s.source, 3).unwrap().messages[6].0.to_density();
        let quad = two_stage_tick_average(&rho, &gen, &clock, 60);
        let kernel = double_dephase(&rho, &gen, &clock).unwrap();
        assert!((quad - kernel.matrix()).camax() < 1e-10);
    }

    #[test]
    fn single_stage_has_half_exponent() {
        let gen = GeneratorSpec::from_energies(&[0.0, 2.0]).unwrap();
        let clock = ClockSpec::new(0.7, 0.4).unwrap();
        let psi = StateVector::from_real(&[1.0, 1.0]).unwrap();
        let once = tick_average(&psi.outer(), &gen, &clock, 40, true);
        let expected = 0.5 * (-(0.4f64 * 0.4) * 4.0 / 2.0).exp();
        assert_abs_diff_eq!(once[(0, 1)].norm(), expected, epsilon = 1e-12);
    }

    #[test]
    fn clock_validation() {
        assert!(ClockSpec::new(0.0, 0.1).is_err());
        assert!(ClockSpec::new(1.0, -0.1).is_err());
        assert!(ClockSpec::new(1.0, f64::NAN).is_err());
        let h = CMatrix::from_row_slice(2, 2, &[C64::from(0.0), C64::new(0.0, 1.0), C64::new(0.0, 1.0), C64::from(0.0)]);
        assert!(GeneratorSpec::from_hamiltonian(&h).is_err());
    }
}
