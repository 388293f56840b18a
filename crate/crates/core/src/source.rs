//! i.i.d. qubit sources, message enumeration and the ε-typical subspace.
//!
//! Eigen-strings of `ρ^⊗n` are encoded as integers in `0..2^n`; the most
//! significant bit is the first sample, matching the Kronecker ordering used
//! everywhere else. A set bit means the sample sits in the minority eigenket
//! `|1'⟩`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, kron_power, numeric_config, spectral_entropy, CMatrix, CVector, DensityMatrix,
    Operator, StateVector, Tensor, C64,
};

/// Probability tolerance on the letter distribution.
const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct QubitSource {
    letters: Vec<StateVector>,
    probs: Vec<f64>,
    /// `γ₀ ≥ γ₁`
    gammas: [f64; 2],
    eigenkets: [StateVector; 2],
    /// Bits.
    entropy: f64,
}

impl QubitSource {
    pub fn new(letters: Vec<StateVector>, probs: Vec<f64>) -> Result<Self> {
        if letters.is_empty() || letters.len() != probs.len() {
            return Err(Error::InvalidSource(format!(
                "{} letters but {} probabilities",
                letters.len(),
                probs.len()
            )));
        }
        if let Some(l) = letters.iter().find(|l| l.dim() != 2) {
            return Err(Error::InvalidSource(format!("letter of dimension {}, expected 2", l.dim())));
        }
        if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidSource("probabilities must lie in [0, 1]".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidSource(format!("probabilities sum to {total}")));
        }

        let rho = letters
            .iter()
            .zip(&probs)
            .fold(CMatrix::zeros(2, 2), |acc, (l, &p)| acc + l.outer() * C64::from(p));
        let (vals, vecs) = hermitian_eigen(&rho);
        let (g0, g1) = (vals[1].clamp(0.0, 1.0), vals[0].clamp(0.0, 1.0));
        let eigenkets = if (g0 - g1).abs() <= numeric_config().tol {
            // degenerate spectrum: lowest-index (computational) eigenkets
            [StateVector::basis(2, 0)?, StateVector::basis(2, 1)?]
        } else {
            [canonical_phase(vecs.column(1).into_owned())?, canonical_phase(vecs.column(0).into_owned())?]
        };
        let gammas = [g0 / (g0 + g1), g1 / (g0 + g1)];
        let entropy = spectral_entropy(&gammas, 2.0);
        Ok(Self { letters, probs, gammas, eigenkets, entropy })
    }

    /// `{|0⟩, |+⟩}` with equal probabilities.
    pub fn zero_plus() -> Self {
        let zero = StateVector::basis(2, 0).expect("valid basis ket");
        let plus = StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).expect("valid ket");
        Self::new(vec![zero, plus], vec![0.5, 0.5]).expect("valid source")
    }

    pub fn letters(&self) -> &[StateVector] {
        &self.letters
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn gamma(&self, j: usize) -> f64 {
        self.gammas[j]
    }

    pub fn gammas(&self) -> [f64; 2] {
        self.gammas
    }

    pub fn eigenket(&self, j: usize) -> &StateVector {
        &self.eigenkets[j]
    }

    /// `S(ρ_χ)` in bits.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    /// Eigenvalue `λ(s) = Π γ_{s_k}` of an eigen-string.
    pub fn string_eigenvalue(&self, n: usize, s: usize) -> f64 {
        let ones = s.count_ones() as i32;
        self.gammas[0].powi(n as i32 - ones) * self.gammas[1].powi(ones)
    }

    /// Product eigenket `|s'⟩`.
    pub fn eigen_string_ket(&self, n: usize, s: usize) -> StateVector {
        (0..n)
            .map(|k| &self.eigenkets[(s >> (n - 1 - k)) & 1])
            .fold(None::<StateVector>, |acc, ket| match acc {
                None => Some(ket.clone()),
                Some(a) => Some(a.tensor(ket)),
            })
            .unwrap_or_else(|| StateVector::basis(1, 0).expect("trivial ket"))
    }

    /// Matrix whose column `s` is `|s'⟩`.
    pub fn eigenbasis(&self, n: usize) -> CMatrix {
        let mut single = CMatrix::zeros(2, 2);
        single.set_column(0, self.eigenkets[0].amps());
        single.set_column(1, self.eigenkets[1].amps());
        kron_power(&single, n)
    }

    /// `ρ_χ^⊗n`
    pub fn density_power(&self, n: usize) -> DensityMatrix {
        let rho = source_density(self);
        DensityMatrix::new(kron_power(rho.matrix(), n)).expect("tensor power of a state")
    }
}

/// Fixes the global phase so the first non-negligible amplitude is real and positive.
fn canonical_phase(v: CVector) -> Result<StateVector> {
    let lead = v.iter().find(|a| a.norm() > 1e-12).copied().unwrap_or(C64::from(1.0));
    let phase = lead / C64::from(lead.norm());
    StateVector::from_vector(v / phase)
}

/// `ρ_χ = Σ p_i |φ_i⟩⟨φ_i|`
pub fn source_density(src: &QubitSource) -> DensityMatrix {
    let m = src
        .letters
        .iter()
        .zip(&src.probs)
        .fold(CMatrix::zeros(2, 2), |acc, (l, &p)| acc + l.outer() * C64::from(p));
    DensityMatrix::from_channel_output(m).expect("convex mixture of pure states")
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectral_entropy(&rho.eigenvalues(), 2.0).max(0.0)
}

/// All `l^n` product messages with product probabilities.
#[derive(Debug, Clone)]
pub struct MessageEnsemble {
    pub n: usize,
    pub messages: Vec<(StateVector, f64)>,
}

impl MessageEnsemble {
    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// `Σ_j p_j f(ψ_j)`
    pub fn average<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&StateVector) -> Result<f64>,
    {
        let mut acc = 0.0;
        for (psi, p) in &self.messages {
            acc += p * f(psi)?;
        }
        Ok(acc)
    }
}

/// Messages are ordered lexicographically in the letter indices, first sample
/// most significant.
pub fn enumerate_messages(src: &QubitSource, n: usize) -> Result<MessageEnsemble> {
    let l = src.letters.len();
    let cfg = numeric_config();
    let needed = (l as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > cfg.enumeration_cap as u128 || n > cfg.max_qubits {
        return Err(Error::EnumerationCap { needed, cap: cfg.enumeration_cap });
    }
    let count = needed as usize;
    let mut messages = Vec::with_capacity(count);
    let mut digits = vec![0usize; n];
    for _ in 0..count {
        let mut ket: Option<StateVector> = None;
        let mut p = 1.0;
        for &d in &digits {
            p *= src.probs[d];
            ket = Some(match ket {
                None => src.letters[d].clone(),
                Some(k) => k.tensor(&src.letters[d]),
            });
        }
        let ket = ket.unwrap_or_else(|| StateVector::basis(1, 0).expect("trivial ket"));
        messages.push((ket, p));
        for pos in (0..n).rev() {
            digits[pos] += 1;
            if digits[pos] < l {
                break;
            }
            digits[pos] = 0;
        }
    }
    Ok(MessageEnsemble { n, messages })
}

/// `|-(1/n) log₂ λ - S|` for eigen-strings with `k` minority letters, `k = 0..=n`.
pub fn weight_class_deviations(src: &QubitSource, n: usize) -> Vec<f64> {
    let [g0, g1] = src.gammas;
    (0..=n)
        .map(|k| {
            let zeros = (n - k) as f64;
            let ones = k as f64;
            let mut surprisal = 0.0;
            if zeros > 0.0 {
                surprisal -= zeros * g0.log2();
            }
            if ones > 0.0 {
                surprisal -= ones * g1.log2();
            }
            (surprisal / n as f64 - src.entropy).abs()
        })
        .collect()
}

/// Range `[lo, hi)` of ε for which the typical set is exactly the union of the
/// given weight classes. `None` if no such ε exists.
pub fn epsilon_window(src: &QubitSource, n: usize, classes: &[usize]) -> Option<(f64, f64)> {
    let dev = weight_class_deviations(src, n);
    if classes.is_empty() || classes.iter().any(|&k| k > n) {
        return None;
    }
    let lo = classes.iter().map(|&k| dev[k]).fold(0.0, f64::max);
    let hi = (0..=n)
        .filter(|k| !classes.contains(k))
        .map(|k| dev[k])
        .fold(f64::INFINITY, f64::min);
    (lo < hi && lo.is_finite()).then_some((lo, hi))
}

/// Midpoint of the window selecting eigen-strings with at most one `1'`
/// at `n = 3` for `src` (the 4-string typical set).
pub fn four_string_epsilon(src: &QubitSource) -> Option<f64> {
    epsilon_window(src, 3, &[0, 1]).map(|(lo, hi)| 0.5 * (lo + hi))
}

#[derive(Debug, Clone)]
pub struct TypicalSpec {
    pub n: usize,
    pub epsilon: f64,
    /// Typical eigen-strings, ascending.
    pub typical_strings: Vec<usize>,
    pub projector: Operator,
    pub delta: f64,
}

impl TypicalSpec {
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn is_typical(&self, s: usize) -> bool {
        self.typical_strings.binary_search(&s).is_ok()
    }

    /// `1 - Λ`
    pub fn complement(&self) -> Operator {
        self.projector.complement().expect("typical projector")
    }

    /// `⟨ψ|Λ|ψ⟩`
    pub fn typical_weight(&self, psi: &StateVector) -> Result<f64> {
        Ok(psi.expectation(self.projector.matrix())?.re.clamp(0.0, 1.0))
    }
}

pub fn build_typical_spec(src: &QubitSource, n: usize, epsilon: f64) -> Result<TypicalSpec> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::OutOfRange(format!("epsilon must be positive, got {epsilon}")));
    }
    if n == 0 || n > numeric_config().max_qubits {
        return Err(Error::OutOfRange(format!("n = {n} outside 1..={}", numeric_config().max_qubits)));
    }
    let dev = weight_class_deviations(src, n);
    let typical_strings: Vec<usize> = (0..1usize << n)
        .filter(|s| dev[s.count_ones() as usize] <= epsilon)
        .collect();
    if typical_strings.is_empty() {
        return Err(Error::EmptyTypicalSet { n, epsilon });
    }

    let basis = src.eigenbasis(n);
    let dim = 1 << n;
    let mut indicator = CVector::zeros(dim);
    let mut mass = 0.0;
    for &s in &typical_strings {
        indicator[s] = C64::from(1.0);
        mass += src.string_eigenvalue(n, s);
    }
    let proj = &basis * CMatrix::from_diagonal(&indicator) * basis.adjoint();
    let projector = Operator::projector(proj)?;
    let delta = (1.0 - mass).clamp(0.0, 1.0);
    Ok(TypicalSpec { n, epsilon, typical_strings, projector, delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn zero_plus_spectrum() {
        let src = QubitSource::zero_plus();
        let c2 = (PI / 8.0).cos().powi(2);
        assert_abs_diff_eq!(src.gamma(0), c2, epsilon = 1e-12);
        assert_abs_diff_eq!(src.gamma(1), 1.0 - c2, epsilon = 1e-12);
        // |0'⟩ = cos(π/8)|0⟩ + sin(π/8)|1⟩, |1'⟩ = sin(π/8)|0⟩ - cos(π/8)|1⟩
        let (c, s) = ((PI / 8.0).cos(), (PI / 8.0).sin());
        let e0 = src.eigenket(0).amps();
        let e1 = src.eigenket(1).amps();
        assert_abs_diff_eq!(e0[0].re, c, epsilon = 1e-12);
        assert_abs_diff_eq!(e0[1].re, s, epsilon = 1e-12);
        assert_abs_diff_eq!(e1[0].re, s, epsilon = 1e-12);
        assert_abs_diff_eq!(e1[1].re, -c, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_letters_give_maximally_mixed() {
        let src = QubitSource::new(
            vec![StateVector::basis(2, 0).unwrap(), StateVector::basis(2, 1).unwrap()],
            vec![0.5, 0.5],
        )
        .unwrap();
        let rho = source_density(&src);
        assert!((rho.matrix() - CMatrix::identity(2, 2) * C64::from(0.5)).camax() < 1e-15);
        assert_abs_diff_eq!(von_neumann_entropy(&rho), 1.0, epsilon = 1e-12);
        // degenerate spectrum falls back to the computational basis
        assert_eq!(src.eigenket(0), &StateVector::basis(2, 0).unwrap());
    }

    #[test]
    fn single_letter_is_pure() {
        let src = QubitSource::new(vec![StateVector::basis(2, 0).unwrap()], vec![1.0]).unwrap();
        let rho = source_density(&src);
        assert_eq!(rho.matrix()[(0, 0)], C64::from(1.0));
        assert_abs_diff_eq!(von_neumann_entropy(&rho), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(src.entropy(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_plus_entropy_near_point_six() {
        let src = QubitSource::zero_plus();
        assert_abs_diff_eq!(src.entropy(), 0.6, epsilon = 0.01);
        assert_abs_diff_eq!(von_neumann_entropy(&source_density(&src)), src.entropy(), epsilon = 1e-10);
    }

    #[test]
    fn rejects_bad_sources() {
        let z = StateVector::basis(2, 0).unwrap();
        assert!(QubitSource::new(vec![z.clone()], vec![0.9]).is_err());
        assert!(QubitSource::new(vec![z.clone()], vec![0.5, 0.5]).is_err());
        assert!(QubitSource::new(vec![StateVector::basis(4, 0).unwrap()], vec![1.0]).is_err());
        assert!(QubitSource::new(vec![], vec![]).is_err());
    }

    #[test]
    fn enumeration_counts_and_probs() {
        let src = QubitSource::zero_plus();
        let ens = enumerate_messages(&src, 3).unwrap();
        assert_eq!(ens.len(), 8);
        for (_, p) in &ens.messages {
            assert_abs_diff_eq!(*p, 0.125, epsilon = 1e-15);
        }
        let ens1 = enumerate_messages(&src, 1).unwrap();
        assert_eq!(ens1.messages[0].0, src.letters()[0]);
        assert_eq!(ens1.messages[1].0, src.letters()[1]);
    }

    #[test]
    fn enumeration_cap_enforced() {
        let src = QubitSource::zero_plus();
        assert!(matches!(enumerate_messages(&src, 40), Err(Error::EnumerationCap { .. })));
    }

    #[test]
    fn four_string_typical_set() {
        let src = QubitSource::zero_plus();
        let (lo, hi) = epsilon_window(&src, 3, &[0, 1]).unwrap();
        assert!(lo < hi);
        let eps = four_string_epsilon(&src).unwrap();
        let spec = build_typical_spec(&src, 3, eps).unwrap();
        assert_eq!(spec.typical_strings, vec![0b000, 0b001, 0b010, 0b100]);
        assert_abs_diff_eq!(spec.delta, 0.058, epsilon = 0.0005);
    }

    #[test]
    fn large_epsilon_keeps_everything() {
        let src = QubitSource::zero_plus();
        let spec = build_typical_spec(&src, 3, 10.0).unwrap();
        assert_eq!(spec.typical_strings.len(), 8);
        assert!((spec.projector.matrix() - CMatrix::identity(8, 8)).camax() < 1e-12);
        assert_abs_diff_eq!(spec.delta, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_typical_set_is_an_error() {
        let src = QubitSource::zero_plus();
        assert!(matches!(build_typical_spec(&src, 3, 0.1), Err(Error::EmptyTypicalSet { .. })));
        assert!(build_typical_spec(&src, 3, 0.0).is_err());
        assert!(build_typical_spec(&src, 3, -1.0).is_err());
    }

    #[test]
    fn degenerate_strings_enter_together() {
        let src = QubitSource::zero_plus();
        for n in 2..=6 {
            for eps in [0.2, 0.4, 0.6, 0.9, 1.4] {
                let Ok(spec) = build_typical_spec(&src, n, eps) else { continue };
                for s in 0..1usize << n {
                    for t in 0..1usize << n {
                        if s.count_ones() == t.count_ones() {
                            assert_eq!(spec.is_typical(s), spec.is_typical(t));
                        }
                    }
                }
            }
        }
    }
}
