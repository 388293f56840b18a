//! Typical measurement performed with a thermal probe.
//!
//! The probe is a `d`-level Gibbs state. Lower-half occupation of the probe
//! after the dilation signals "typical"; the total lower-half population is
//! the correlation figure `C_Max`. Channel-level consequences (received
//! ensemble, average-fidelity bounds, Haar averages, gentle-measurement
//! bound) are all expressed in terms of `C_Max` and the projector `Λ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::haar::{haar_mean, McEstimate};
use crate::linalg::{
    hermitize, kron_power, numeric_config, partial_trace_matrix, trace_norm, CMatrix, DensityMatrix, Operator,
    StateVector, C64,
};
use crate::source::{MessageEnsemble, TypicalSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalProbe {
    beta: f64,
    energies: Vec<f64>,
    populations: Vec<f64>,
    c_max: f64,
}

impl ThermalProbe {
    /// `energies` must be ascending and of even length.
    pub fn new(energies: Vec<f64>, beta: f64) -> Result<Self> {
        let d = energies.len();
        if d < 2 || d % 2 != 0 {
            return Err(Error::InvalidProbe(format!("probe dimension {d} must be even and >= 2")));
        }
        if energies.windows(2).any(|w| w[0] > w[1]) || energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidProbe("energies must be finite and ascending".into()));
        }
        let populations = gibbs_populations(&energies, beta)?;
        let c_max = populations[..d / 2].iter().sum::<f64>().clamp(0.5, 1.0);
        Ok(Self { beta, energies, populations, c_max })
    }

    /// Qubit probe with `H = -σ_z` (levels `-1`, `+1`).
    pub fn qubit(beta: f64) -> Result<Self> {
        Self::new(vec![-1.0, 1.0], beta)
    }

    /// Levels `E_i = i·gap`, `i = 0..d`.
    pub fn equally_spaced(d: usize, beta: f64, gap: f64) -> Result<Self> {
        if !(gap >= 0.0) {
            return Err(Error::InvalidProbe(format!("level spacing {gap} must be nonnegative")));
        }
        Self::new((0..d).map(|i| i as f64 * gap).collect(), beta)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::from_diagonal(&self.populations).expect("Gibbs populations")
    }
}

fn gibbs_populations(energies: &[f64], beta: f64) -> Result<Vec<f64>> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::OutOfRange(format!("inverse temperature {beta} must be finite and >= 0")));
    }
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / z).collect())
}

/// Diagonal Gibbs state `e^{-βH}/Z`.
pub fn thermal_state(energies: &[f64], beta: f64) -> Result<DensityMatrix> {
    if energies.is_empty() {
        return Err(Error::InvalidProbe("no energy levels".into()));
    }
    DensityMatrix::from_diagonal(&gibbs_populations(energies, beta)?)
}

/// Permutation `|i⟩ ↔ |i + d/2⟩` exchanging the two halves of the probe spectrum.
pub fn half_spectrum_swap(d: usize) -> CMatrix {
    let half = d / 2;
    CMatrix::from_fn(d, d, |r, c| if (r + half) % d == c { C64::from(1.0) } else { C64::from(0.0) })
}

/// `V_d = Λ ⊗ 1_d + (1 - Λ) ⊗ X_d` on message ⊗ probe, where `X_d` swaps the
/// lower and upper halves of the probe spectrum (`σ_x` for `d = 2`).
pub fn dilated_measurement_unitary(spec: &TypicalSpec, d: usize) -> Result<Operator> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::InvalidProbe(format!("probe dimension {d} must be a power of two >= 2")));
    }
    let lam = spec.projector.matrix();
    let perp = spec.complement().into_matrix();
    let v = lam.kronecker(&CMatrix::identity(d, d)) + perp.kronecker(&half_spectrum_swap(d));
    Operator::unitary(v)
}

/// Outcome-resolved result of the thermal-probe typical measurement.
/// A conditional state is `None` when its outcome has zero probability.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub typical_state: Option<DensityMatrix>,
    pub atypical_state: Option<DensityMatrix>,
    pub p_typical: f64,
    pub p_atypical: f64,
}

impl MeasurementOutcome {
    fn from_unnormalized(typ: CMatrix, atyp: CMatrix) -> Result<Self> {
        let t = numeric_config().tol;
        let p_typical = typ.trace().re.max(0.0);
        let p_atypical = atyp.trace().re.max(0.0);
        let norm = |m: CMatrix, p: f64| -> Result<Option<DensityMatrix>> {
            if p <= t {
                Ok(None)
            } else {
                DensityMatrix::from_channel_output(m / C64::from(p)).map(Some)
            }
        };
        Ok(Self {
            typical_state: norm(typ, p_typical)?,
            atypical_state: norm(atyp, p_atypical)?,
            p_typical,
            p_atypical,
        })
    }

    /// `p₀ ρ₀ + p₁ ρ₁`
    pub fn ensemble(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim(), self.dim());
        if let Some(s) = &self.typical_state {
            acc += s.matrix() * C64::from(self.p_typical);
        }
        if let Some(s) = &self.atypical_state {
            acc += s.matrix() * C64::from(self.p_atypical);
        }
        acc
    }

    fn dim(&self) -> usize {
        self.typical_state
            .as_ref()
            .or(self.atypical_state.as_ref())
            .map(DensityMatrix::dim)
            .unwrap_or(0)
    }
}

/// Closed form: the typical outcome carries `C·ΛρΛ + (1-C)·Λ^⊥ρΛ^⊥`, the
/// atypical one the complementary mixture.
pub fn imperfect_typical_measurement(
    message: &DensityMatrix,
    spec: &TypicalSpec,
    probe: &ThermalProbe,
) -> Result<MeasurementOutcome> {
    if message.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: message.dim() });
    }
    let lam = spec.projector.matrix();
    let perp = spec.complement().into_matrix();
    let inside = lam * message.matrix() * lam;
    let outside = &perp * message.matrix() * &perp;
    let c = C64::from(probe.c_max());
    let c_bar = C64::from(1.0 - probe.c_max());
    MeasurementOutcome::from_unnormalized(&inside * c + &outside * c_bar, inside * c_bar + outside * c)
}

/// Same outcome computed by running the dilation `V_d (ρ ⊗ τ) V_d†`,
/// projecting the probe on its lower or upper half and tracing it out.
pub fn dilated_typical_measurement(
    message: &DensityMatrix,
    spec: &TypicalSpec,
    probe: &ThermalProbe,
) -> Result<MeasurementOutcome> {
    let d = probe.dim();
    let dim = spec.dim();
    if message.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: message.dim() });
    }
    let v = dilated_measurement_unitary(spec, d)?;
    let joint = v.matrix() * message.matrix().kronecker(probe.state().matrix()) * v.matrix().adjoint();
    let lower = CMatrix::from_fn(d, d, |r, c| if r == c && r < d / 2 { C64::from(1.0) } else { C64::from(0.0) });
    let upper = CMatrix::identity(d, d) - &lower;
    let branch = |p: &CMatrix| -> Result<CMatrix> {
        let proj = CMatrix::identity(dim, dim).kronecker(p);
        partial_trace_matrix(&(&proj * &joint * &proj), &[0], &[dim, d])
    };
    MeasurementOutcome::from_unnormalized(branch(&lower)?, branch(&upper)?)
}

/// `T(ρ) = ΛρΛ + Λ^⊥ρΛ^⊥`
pub fn typical_instrument(rho: &CMatrix, spec: &TypicalSpec) -> CMatrix {
    let lam = spec.projector.matrix();
    let perp = spec.complement().into_matrix();
    lam * rho * lam + &perp * rho * &perp
}

fn check_c_max(c_max: f64) -> Result<()> {
    let t = numeric_config().tol;
    if !(0.5 - t..=1.0 + t).contains(&c_max) {
        return Err(Error::OutOfRange(format!("C_Max = {c_max} outside [1/2, 1]")));
    }
    Ok(())
}

/// `C ΛψψΛ + (1-C) Λ^⊥ψψΛ^⊥ + (C⟨Λ^⊥⟩ + (1-C)⟨Λ⟩) |ψ_G⟩⟨ψ_G|`
pub fn received_ensemble_thermal(
    message: &StateVector,
    spec: &TypicalSpec,
    c_max: f64,
    guess: &StateVector,
) -> Result<DensityMatrix> {
    check_c_max(c_max)?;
    if guess.dim() != message.dim() {
        return Err(Error::DimensionMismatch { expected: message.dim(), got: guess.dim() });
    }
    let x = spec.typical_weight(message)?;
    let inside = spec.projector.matrix() * message.amps();
    let outside = message.amps() - &inside;
    let m = &inside * inside.adjoint() * C64::from(c_max)
        + &outside * outside.adjoint() * C64::from(1.0 - c_max)
        + guess.outer() * C64::from(c_max * (1.0 - x) + (1.0 - c_max) * x);
    DensityMatrix::from_channel_output(m)
}

/// `⟨ψ|ρ̃_R|ψ⟩` in closed form.
pub fn fidelity_thermal(message: &StateVector, spec: &TypicalSpec, c_max: f64, guess: &StateVector) -> Result<f64> {
    check_c_max(c_max)?;
    let x = spec.typical_weight(message)?;
    let y = 1.0 - x;
    let g = guess.inner(message)?.norm_sqr();
    Ok(c_max * x * x + (1.0 - c_max) * y * y + ((1.0 - c_max) * x + c_max * y) * g)
}

/// Exhaustive ensemble average of `⟨ψ|ρ̃_R|ψ⟩`, building each received state.
pub fn average_fidelity_thermal(
    ensemble: &MessageEnsemble,
    spec: &TypicalSpec,
    c_max: f64,
    guess: &StateVector,
) -> Result<f64> {
    ensemble.average(|psi| {
        let rho = received_ensemble_thermal(psi, spec, c_max, guess)?;
        Ok(psi.expectation(rho.matrix())?.re)
    })
}

/// `C(1 - 2δ) + (1 - C)δ²`
pub fn thermal_bound(c_max: f64, delta: f64) -> f64 {
    c_max * (1.0 - 2.0 * delta) + (1.0 - c_max) * delta * delta
}

/// Plain bound plus `((1-C)(1-δ) + Cδ)·Σ_j p_j |⟨ψ_G|ψ_j⟩|²`.
pub fn thermal_bound_tight(c_max: f64, delta: f64, guess_overlap_avg: f64) -> f64 {
    thermal_bound(c_max, delta) + ((1.0 - c_max) * (1.0 - delta) + c_max * delta) * guess_overlap_avg
}

/// `(4^n (√C - √(1-C))² + 2^n) / (4^n + 2^n)`
pub fn haar_average_fidelity_analytic(n: usize, c_max: f64) -> f64 {
    let d = (1u64 << n) as f64;
    let k = c_max.sqrt() - (1.0 - c_max).max(0.0).sqrt();
    (d * d * k * k + d) / (d * d + d)
}

/// Same as [`haar_average_fidelity_analytic`] with `c_max = 1 - eta`, but
/// without forming `1 - eta` (which rounds to 1 once `eta < 1e-16`).
pub fn haar_average_fidelity_from_eta(n: usize, eta: f64) -> f64 {
    let d = (1u64 << n) as f64;
    let eta = eta.clamp(0.0, 1.0);
    let k = (1.0 - eta).sqrt() - eta.sqrt();
    (d * d * k * k + d) / (d * d + d)
}

/// Haar average of `Σ_i |⟨ψ|K_i|ψ⟩|²`:
/// `(Σ_i |tr K_i|² + Σ_i tr K_i†K_i) / (d² + d)`.
/// For a trace-preserving Kraus set the second sum is `d`.
pub fn nielsen_average_fidelity(kraus: &[CMatrix]) -> f64 {
    let d = kraus.first().map(|k| k.nrows()).unwrap_or(0) as f64;
    let traces: f64 = kraus.iter().map(|k| k.trace().norm_sqr()).sum();
    let norms: f64 = kraus.iter().map(|k| (k.adjoint() * k).trace().re).sum();
    (traces + norms) / (d * d + d)
}

/// Amplitude `√C - √(1-C)` of the single Kraus operator of the noisy channel.
pub fn noisy_kraus_amplitude(c_max: f64) -> f64 {
    c_max.sqrt() - (1.0 - c_max).max(0.0).sqrt()
}

/// `{ (√C - √(1-C)) 1 }` on `n` qubits; trace-decreasing for `C < 1`.
pub fn noisy_channel_kraus(n: usize, c_max: f64) -> Vec<CMatrix> {
    let d = 1usize << n;
    vec![CMatrix::identity(d, d) * C64::from(noisy_kraus_amplitude(c_max))]
}

/// Trace-preserving completion of the noisy channel: the identity Kraus
/// operator plus a traceless one, `√(1-k²) Z^⊗n`.
pub fn noisy_channel_completion(n: usize, c_max: f64) -> Vec<CMatrix> {
    let k = noisy_kraus_amplitude(c_max);
    let mut kraus = noisy_channel_kraus(n, c_max);
    let z = Operator::pauli_z().into_matrix();
    kraus.push(kron_power(&z, n) * C64::from((1.0 - k * k).max(0.0).sqrt()));
    kraus
}

/// `{Λ, 1 - Λ}`
pub fn instrument_kraus(spec: &TypicalSpec) -> Vec<CMatrix> {
    vec![spec.projector.matrix().clone(), spec.complement().into_matrix()]
}

/// Monte Carlo Haar average of `Σ_i |⟨ψ|K_i|ψ⟩|²`.
pub fn haar_average_fidelity_mc_kraus(kraus: &[CMatrix], samples: usize, seed: u64) -> Result<McEstimate> {
    let dim = kraus.first().map(|k| k.nrows()).ok_or_else(|| Error::OutOfRange("no Kraus operators".into()))?;
    if samples < 100 {
        return Err(Error::OutOfRange(format!("{samples} samples, need at least 100")));
    }
    Ok(haar_mean(dim, samples, seed, |psi| {
        kraus.iter().map(|k| psi.amps().dotc(&(k * psi.amps())).norm_sqr()).sum()
    }))
}

/// Monte Carlo estimate of the closed-form Haar average: samples the
/// trace-preserving completion of the noisy channel on `n` qubits.
pub fn haar_average_fidelity_mc(n: usize, c_max: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    check_c_max(c_max)?;
    haar_average_fidelity_mc_kraus(&noisy_channel_completion(n, c_max), samples, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GentleCheck {
    /// `‖ψψ - (C ΛψψΛ + (1-C) Λ^⊥ψψΛ^⊥)‖₁`
    pub lhs: f64,
    /// `2√⟨ψ|Λ^⊥|ψ⟩ + (1 - C)`
    pub rhs: f64,
}

impl GentleCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + numeric_config().tol
    }
}

/// Trace distance between a message and its noisily measured version
/// (thermal-probe typical branch), next to the gentle-measurement bound.
pub fn gentle_bound_check(message: &StateVector, spec: &TypicalSpec, c_max: f64) -> Result<GentleCheck> {
    check_c_max(c_max)?;
    if message.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: message.dim() });
    }
    let inside = spec.projector.matrix() * message.amps();
    let outside = message.amps() - &inside;
    let measured =
        &inside * inside.adjoint() * C64::from(c_max) + &outside * outside.adjoint() * C64::from(1.0 - c_max);
    let lhs = trace_norm(&hermitize(&(message.outer() - measured)));
    let delta_psi = outside.norm_squared().clamp(0.0, 1.0);
    Ok(GentleCheck { lhs, rhs: 2.0 * delta_psi.sqrt() + (1.0 - c_max) })
}
