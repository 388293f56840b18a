//! Decoding with thermal instead of pure ground-state ancillas.

use serde::Serialize;

use crate::coding::{compress, decode, CodingSetup, EncodingPlan, KeptQubits, PlanOptions};
use crate::error::{Error, Result};
use crate::linalg::{fidelity_pure_mixed, numeric_config, DensityMatrix, StateVector, Tensor};
use crate::source::{epsilon_window, QubitSource};

/// `(1-η)|0⟩⟨0| + η|1⟩⟨1|`, with `ħω = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoisyGroundQubit {
    pub eta: f64,
    /// `β` with `1 - η = (1 + tanh β)/2`; `+∞` at `η = 0`.
    pub beta_equiv: f64,
}

impl NoisyGroundQubit {
    pub fn from_eta(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self { eta, beta_equiv: (1.0 - 2.0 * eta).atanh() })
    }

    pub fn from_beta(beta: f64) -> Result<Self> {
        if beta.is_nan() {
            return Err(Error::OutOfRange("inverse temperature is NaN".into()));
        }
        Ok(Self { eta: eta_from_beta(beta), beta_equiv: beta })
    }

    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::from_diagonal(&[1.0 - self.eta, self.eta]).expect("qubit populations")
    }

    /// `J`-fold product of [`Self::state`]; the 0-qubit state is `[1]`.
    pub fn product_state(&self, j: usize) -> DensityMatrix {
        let one = self.state();
        let mut acc = DensityMatrix::from_diagonal(&[1.0]).expect("scalar state");
        for _ in 0..j {
            acc = acc.tensor(&one);
        }
        acc
    }
}

/// `η = (1 - tanh β)/2`
pub fn eta_from_beta(beta: f64) -> f64 {
    0.5 * (1.0 - beta.tanh())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange(format!("excited population {eta} outside [0, 1]")));
    }
    Ok(())
}

/// `(1-η)^J`
pub fn append_fidelity_closed(eta: f64, j: usize) -> Result<f64> {
    check_eta(eta)?;
    Ok((1.0 - eta).powi(j as i32))
}

/// `J = n - ⌈nS + ε⌉`; negative when compression is too aggressive for `n`.
pub fn appended_count(n: usize, entropy: f64, epsilon: f64) -> i64 {
    n as i64 - (n as f64 * entropy + epsilon).ceil() as i64
}

/// `2^{-J} (1 + tanh β)^J` for a given `J`.
pub fn append_fidelity_beta_j(beta: f64, j: usize) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::OutOfRange(format!("inverse temperature {beta} must be >= 0")));
    }
    Ok((0.5 * (1.0 + beta.tanh())).powi(j as i32))
}

/// Append fidelity at inverse temperature `β` with `J = n - ⌈nS + ε⌉`.
pub fn append_fidelity_beta(beta: f64, n: usize, entropy: f64, epsilon: f64) -> Result<f64> {
    let j = appended_count(n, entropy, epsilon);
    if j < 0 {
        return Err(Error::NegativeAppendCount { n, kept: n as i64 - j });
    }
    append_fidelity_beta_j(beta, j as usize)
}

/// Full pipeline result; `in_scope` is false when the message is not of the
/// form `U†(|ψ_c⟩ ⊗ |0⟩^⊗J)` and the closed form does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendReport {
    pub fidelity: f64,
    /// Weight of `U|ψ⟩` on strings whose last `J` bits are zero.
    pub prefix_weight: f64,
    pub in_scope: bool,
}

/// `⟨ψ| U†(Tr_J[UψψU†] ⊗ ρ(η)^⊗J) U |ψ⟩` for any message.
pub fn append_fidelity_unchecked(message: &StateVector, plan: &EncodingPlan, eta: f64) -> Result<AppendReport> {
    check_eta(eta)?;
    if message.dim() != plan.dim() {
        return Err(Error::DimensionMismatch { expected: plan.dim(), got: message.dim() });
    }
    let rotated = message.evolve(&plan.unitary)?;
    let prefix_weight = rotated.expectation(&plan.prefix_projector())?.re.clamp(0.0, 1.0);
    let compressed = compress(message, plan)?;
    let appended = NoisyGroundQubit::from_eta(eta)?.product_state(plan.discarded);
    let decoded = decode(&compressed, &appended, plan)?;
    let fidelity = fidelity_pure_mixed(message, &decoded)?;
    let in_scope = 1.0 - prefix_weight <= numeric_config().tol.max(1e-9);
    Ok(AppendReport { fidelity, prefix_weight, in_scope })
}

/// Simulated append fidelity; errors with [`Error::NotTypical`] when the
/// message has weight outside the kept-qubit prefix.
pub fn append_fidelity_simulated(message: &StateVector, plan: &EncodingPlan, eta: f64) -> Result<f64> {
    let report = append_fidelity_unchecked(message, plan, eta)?;
    if !report.in_scope {
        return Err(Error::NotTypical(report.prefix_weight));
    }
    Ok(report.fidelity)
}

/// A plan for the `{|0⟩, |+⟩}` source that discards exactly `J` qubits,
/// `J = 0..=5`.
///
/// `J ≥ 1` uses the eigen-strings with a single `1'` as the typical set at
/// `n = 3, 4, 6, 7, 8` (the 4-string set at `n = 3`), kept on `⌈log₂ n⌉`
/// qubits. `J = 0` keeps both qubits of an `n = 2` block.
pub fn synthetic_setup(j: usize) -> Result<CodingSetup> {
    let src = QubitSource::zero_plus();
    let (n, classes, kept): (usize, &[usize], KeptQubits) = match j {
        0 => (2, &[0, 1], KeptQubits::Explicit(2)),
        1 => (3, &[0, 1], KeptQubits::Minimal),
        2 => (4, &[1], KeptQubits::Minimal),
        3 => (6, &[1], KeptQubits::Minimal),
        4 => (7, &[1], KeptQubits::Minimal),
        5 => (8, &[1], KeptQubits::Minimal),
        _ => return Err(Error::OutOfRange(format!("no synthetic plan for J = {j}"))),
    };
    let (lo, hi) = epsilon_window(&src, n, classes)
        .ok_or_else(|| Error::Invariant(format!("no epsilon isolates classes {classes:?} at n = {n}")))?;
    let options = PlanOptions { kept, ..PlanOptions::default() };
    let setup = CodingSetup::new(src, n, 0.5 * (lo + hi), &options)?;
    debug_assert_eq!(setup.plan.discarded, j);
    Ok(setup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_examples() {
        assert_eq!(append_fidelity_closed(0.0, 7).unwrap(), 1.0);
        assert_eq!(append_fidelity_closed(0.4, 0).unwrap(), 1.0);
        assert_abs_diff_eq!(append_fidelity_closed(0.1, 2).unwrap(), 0.81, epsilon = 1e-15);
        assert!(append_fidelity_closed(1.5, 1).is_err());
    }

    #[test]
    fn beta_form_examples() {
        assert_abs_diff_eq!(append_fidelity_beta_j(0.0, 3).unwrap(), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(append_fidelity_beta_j(50.0, 3).unwrap(), 1.0, epsilon = 1e-15);
        let s = QubitSource::zero_plus().entropy();
        // ⌈3·0.6009 + 0.1⌉ = 2, J = 1
        assert_abs_diff_eq!(append_fidelity_beta(1.0, 3, s, 0.1).unwrap(), 0.880_797_077_977_882_3, epsilon = 1e-12);
        assert_eq!(append_fidelity_beta(1.0, 3, s, 1.5), Err(Error::NegativeAppendCount { n: 3, kept: 4 }));
        assert!(append_fidelity_beta(-1.0, 3, s, 0.1).is_err());
    }

    #[test]
    fn eta_beta_round_trip() {
        for eta in [0.0, 0.01, 0.2, 0.49] {
            let q = NoisyGroundQubit::from_eta(eta).unwrap();
            assert_abs_diff_eq!(eta_from_beta(q.beta_equiv), eta, epsilon = 1e-10);
        }
        assert_eq!(NoisyGroundQubit::from_eta(0.0).unwrap().beta_equiv, f64::INFINITY);
    }

    #[test]
    fn synthetic_plans_have_requested_sizes() {
        for j in 0..=5 {
            let s = synthetic_setup(j).unwrap();
            assert_eq!(s.plan.discarded, j);
        }
        assert!(synthetic_setup(6).is_err());
    }

    #[test]
    fn pipeline_matches_closed_form_on_typical_eigenkets() {
        let s = synthetic_setup(1).unwrap();
        for &t in &s.spec.typical_strings {
            let psi = s.source.eigen_string_ket(3, t);
            assert_abs_diff_eq!(append_fidelity_simulated(&psi, &s.plan, 0.2).unwrap(), 0.8, epsilon = 1e-10);
            assert_abs_diff_eq!(append_fidelity_simulated(&psi, &s.plan, 0.0).unwrap(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn superposition_of_typical_strings_also_matches() {
        let s = synthetic_setup(2).unwrap();
        let basis = s.source.eigenbasis(4);
        let mut v = crate::linalg::CVector::zeros(16);
        for (i, &t) in s.spec.typical_strings.iter().enumerate() {
            v += basis.column(t) * C64::new(1.0 + i as f64, 0.5 * i as f64);
        }
        let psi = StateVector::from_vector(v).unwrap();
        let f = append_fidelity_simulated(&psi, &s.plan, 0.05).unwrap();
        assert_abs_diff_eq!(f, 0.95f64.powi(2), epsilon = 1e-10);
    }

    #[test]
    fn atypical_message_is_flagged() {
        let s = synthetic_setup(1).unwrap();
        let psi = s.source.eigen_string_ket(3, 0b111);
        assert!(matches!(append_fidelity_simulated(&psi, &s.plan, 0.1), Err(Error::NotTypical(_))));
        let report = append_fidelity_unchecked(&psi, &s.plan, 0.1).unwrap();
        assert!(!report.in_scope);
        assert!((0.0..=1.0).contains(&report.fidelity));
    }
}
