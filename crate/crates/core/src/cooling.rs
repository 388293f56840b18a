//! Closed-form cooling relations: how many reservoir steps a target ground
//! population costs at bounded entropy production, and what that caps the
//! append and measurement fidelities at. Natural logarithms throughout.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, hermitian_eigenvalues, numeric_config, partial_trace_matrix, spectral_entropy, CMatrix,
    DensityMatrix, Operator, OperatorKind,
};

/// Relative slack used when rounding the step count up, so that a value
/// that is an integer up to rounding error is not bumped to the next one.
const CEIL_SLACK: f64 = 1e-9;

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::OutOfRange(format!("entropy-production cap {kappa} must be positive")));
    }
    Ok(())
}

fn ceil_with_slack(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= CEIL_SLACK * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// `L = ⌈(e+1)/(eκ) · ln((e+1)/(ηκ))⌉`, at least 1.
pub fn steps_required(kappa: f64, eta: f64) -> Result<u64> {
    check_kappa(kappa)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::OutOfRange(format!("target excited population {eta} outside (0, 1)")));
    }
    let raw = (E + 1.0) / (E * kappa) * ((E + 1.0) / (eta * kappa)).ln();
    Ok(ceil_with_slack(raw).max(1.0) as u64)
}

/// `η = (e+1)/κ · exp(-(e/(e+1)) L κ)`
pub fn eta_achieved(steps: u64, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if steps == 0 {
        return Err(Error::OutOfRange("need at least one cooling step".into()));
    }
    Ok((E + 1.0) / kappa * (-(E / (E + 1.0)) * steps as f64 * kappa).exp())
}

/// `1 - e^{-LΣ}/Σ`; negative values (vacuous bound) are returned unchanged.
pub fn ground_pop_bound(steps: u64, sigma_prod: f64) -> Result<f64> {
    check_sigma(sigma_prod)?;
    Ok(1.0 - residual(steps, sigma_prod))
}

fn check_sigma(sigma_prod: f64) -> Result<()> {
    if !(sigma_prod > 0.0) || sigma_prod.is_nan() {
        return Err(Error::OutOfRange(format!("entropy production {sigma_prod} must be positive")));
    }
    Ok(())
}

/// `e^{-LΣ}/Σ`
fn residual(steps: u64, sigma_prod: f64) -> f64 {
    (-(steps as f64) * sigma_prod).exp() / sigma_prod
}

/// `√(1 - x) - √x` with `x = e^{-LΣ}/Σ`, defined for `x ∈ [0, 1]`.
pub fn g_function(steps: u64, sigma_prod: f64) -> Result<f64> {
    check_sigma(sigma_prod)?;
    let x = residual(steps, sigma_prod);
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!("e^(-LΣ)/Σ = {x} outside [0, 1]")));
    }
    Ok((1.0 - x).sqrt() - x.sqrt())
}

/// Upper limits on the append fidelity and the Haar-averaged measurement
/// fidelity set by a cooling budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityCeilings {
    pub append: f64,
    pub measure: f64,
}

/// `(1 - e^{-LΣ}/Σ)^J` and `(4^n g² + 2^n)/(4^n + 2^n)`.
pub fn fidelity_ceilings(n: usize, j: usize, steps: u64, sigma_prod: f64) -> Result<FidelityCeilings> {
    let g = g_function(steps, sigma_prod)?;
    let bound = ground_pop_bound(steps, sigma_prod)?;
    let d = (1u64 << n) as f64;
    Ok(FidelityCeilings { append: bound.powi(j as i32), measure: (d * d * g * g + d) / (d * d + d) })
}

/// Step budget `L`, entropy-production cap `κ`, target `η` and achieved `⟨Σ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoolingBudget {
    pub steps: u64,
    pub kappa: f64,
    pub eta_target: f64,
    pub sigma_prod: f64,
}

impl CoolingBudget {
    pub fn new(steps: u64, kappa: f64, eta_target: f64, sigma_prod: f64) -> Result<Self> {
        check_kappa(kappa)?;
        if steps == 0 {
            return Err(Error::OutOfRange("need at least one cooling step".into()));
        }
        if !(eta_target > 0.0 && eta_target < 1.0) {
            return Err(Error::OutOfRange(format!("target excited population {eta_target} outside (0, 1)")));
        }
        if !(sigma_prod >= 0.0) || sigma_prod > kappa {
            return Err(Error::OutOfRange(format!("entropy production {sigma_prod} outside [0, κ = {kappa}]")));
        }
        Ok(Self { steps, kappa, eta_target, sigma_prod })
    }

    /// Budget that saturates the cap: `L` from the step formula and `⟨Σ⟩ = κ`.
    pub fn from_target(kappa: f64, eta_target: f64) -> Result<Self> {
        Self::new(steps_required(kappa, eta_target)?, kappa, eta_target, kappa)
    }

    pub fn ceilings(&self, n: usize, j: usize) -> Result<FidelityCeilings> {
        fidelity_ceilings(n, j, self.steps, self.sigma_prod)
    }
}

/// Von Neumann entropy in nats.
pub fn entropy_nats(m: &CMatrix) -> f64 {
    spectral_entropy(&hermitian_eigenvalues(m), E)
}

/// `D(ρ‖σ) = tr ρ (ln ρ - ln σ)` in nats; `+∞` when `supp ρ ⊄ supp σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: rho.dim() });
    }
    let t = numeric_config().tol;
    let (vals, vecs) = hermitian_eigen(sigma.matrix());
    let mut cross = 0.0;
    for (i, &lam) in vals.iter().enumerate() {
        let v = vecs.column(i);
        let weight = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
        if lam <= t {
            if weight > t {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * lam.ln();
    }
    Ok((-entropy_nats(rho.matrix()) - cross).max(0.0))
}

/// `I(A:B) = S(A) + S(B) - S(AB)` in nats for a bipartite state with factor dims `[d_A, d_B]`.
pub fn mutual_information(joint: &DensityMatrix, dims: [usize; 2]) -> Result<f64> {
    let a = partial_trace_matrix(joint.matrix(), &[0], &dims)?;
    let b = partial_trace_matrix(joint.matrix(), &[1], &dims)?;
    Ok((entropy_nats(&a) + entropy_nats(&b) - entropy_nats(joint.matrix())).max(0.0))
}

/// `⟨Σ⟩ = I(S':E') + D(E'‖E)` for the joint state `U (ρ_S ⊗ ρ_E) U†`.
pub fn entropy_production_diagnostic(
    sys_init: &DensityMatrix,
    env_init: &DensityMatrix,
    global_u: &Operator,
) -> Result<f64> {
    let dims = [sys_init.dim(), env_init.dim()];
    if global_u.dim() != dims[0] * dims[1] {
        return Err(Error::DimensionMismatch { expected: dims[0] * dims[1], got: global_u.dim() });
    }
    if global_u.kind() != OperatorKind::Unitary {
        return Err(Error::Invariant("entropy production needs a unitary process".into()));
    }
    let joint = DensityMatrix::from_channel_output(
        global_u.matrix() * sys_init.matrix().kronecker(env_init.matrix()) * global_u.matrix().adjoint(),
    )?;
    let env_final = DensityMatrix::from_channel_output(partial_trace_matrix(joint.matrix(), &[1], &dims)?)?;
    let info = mutual_information(&joint, dims)?;
    let rel = relative_entropy(&env_final, env_init)?;
    Ok(info + rel)
}

/// Two-qubit swap.
pub fn swap_gate() -> Operator {
    let m = CMatrix::from_fn(4, 4, |r, c| {
        let swapped = ((c & 1) << 1) | (c >> 1);
        if r == swapped {
            1.0.into()
        } else {
            0.0.into()
        }
    });
    Operator::unitary(m).expect("permutation matrix")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::thermal_state;
    use approx::assert_abs_diff_eq;

    #[test]
    fn step_count_example() {
        assert_eq!(steps_required(0.1, 0.01).unwrap(), 113);
    }

    #[test]
    fn eta_achieved_example() {
        // (e+1)/0.1 · exp(-(e/(e+1))·11.3)
        let expected = (E + 1.0) / 0.1 * (-(E / (E + 1.0)) * 11.3).exp();
        let eta = eta_achieved(113, 0.1).unwrap();
        assert_abs_diff_eq!(eta, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(eta, 0.009_608_423_109_103_172, epsilon = 1e-15);
        assert!(steps_required(0.1, eta).unwrap() <= 113);
    }

    #[test]
    fn step_count_edges() {
        assert!(steps_required(0.0, 0.1).is_err());
        assert!(steps_required(0.1, 0.0).is_err());
        assert!(steps_required(0.1, 1.0).is_err());
        // large κ makes the logarithm negative; the count is floored at one step
        assert_eq!(steps_required(10.0, 0.9).unwrap(), 1);
        assert!(steps_required(0.1, 0.999).unwrap() >= 1);
    }

    #[test]
    fn doubling_kappa_never_increases_steps() {
        for i in 1..=40 {
            let kappa = 0.025 * i as f64;
            for eta in [0.001, 0.01, 0.1, 0.3] {
                assert!(steps_required(2.0 * kappa, eta).unwrap() <= steps_required(kappa, eta).unwrap());
            }
        }
    }

    #[test]
    fn eta_vanishes_for_many_steps() {
        assert!(eta_achieved(100_000, 0.1).unwrap() < 1e-300);
        assert!(eta_achieved(0, 0.1).is_err());
    }

    #[test]
    fn ground_pop_examples() {
        assert_abs_diff_eq!(ground_pop_bound(0, 1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ground_pop_bound(100, 0.5).unwrap(), 1.0, epsilon = 1e-20);
        assert!(ground_pop_bound(1, 0.01).unwrap() < 0.0);
        assert!(ground_pop_bound(1, 0.0).is_err());
    }

    #[test]
    fn g_examples() {
        // e^{-Σ}/Σ = 1/2 at Σ = W(2)
        let sigma = 0.852_605_502_013_725_5;
        assert_abs_diff_eq!(g_function(1, sigma).unwrap(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g_function(1000, 0.5).unwrap(), 1.0, epsilon = 1e-12);
        assert!(g_function(1, 0.01).is_err());
    }

    #[test]
    fn ceilings_examples() {
        let rich = fidelity_ceilings(3, 1, 10, 1e3).unwrap();
        assert_abs_diff_eq!(rich.append, 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(rich.measure, 1.0, epsilon = 1e-3);
        assert_eq!(fidelity_ceilings(3, 0, 50, 0.2).unwrap().append, 1.0);
        let c = fidelity_ceilings(3, 1, 50, 0.2).unwrap();
        let x = (-10.0f64).exp() / 0.2;
        let g = (1.0 - x).sqrt() - x.sqrt();
        assert_abs_diff_eq!(c.measure, (64.0 * g * g + 8.0) / 72.0, epsilon = 1e-15);
    }

    #[test]
    fn budget_validation() {
        let b = CoolingBudget::from_target(0.1, 0.01).unwrap();
        assert_eq!(b.steps, 113);
        assert_eq!(b.sigma_prod, 0.1);
        assert!(CoolingBudget::new(10, 0.1, 0.01, 0.2).is_err());
    }

    #[test]
    fn diagnostic_examples() {
        let t1 = thermal_state(&[-1.0, 1.0], 1.0).unwrap();
        let t2 = thermal_state(&[-1.0, 1.0], 2.0).unwrap();
        let id = Operator::identity(4);
        assert_abs_diff_eq!(entropy_production_diagnostic(&t1, &t2, &id).unwrap(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(entropy_production_diagnostic(&t1, &t1, &swap_gate()).unwrap(), 0.0, epsilon = 1e-10);
        let p = [t1.matrix()[(0, 0)].re, t1.matrix()[(1, 1)].re];
        let q = [t2.matrix()[(0, 0)].re, t2.matrix()[(1, 1)].re];
        let d: f64 = (0..2).map(|i| p[i] * (p[i] / q[i]).ln()).sum();
        let sigma = entropy_production_diagnostic(&t1, &t2, &swap_gate()).unwrap();
        assert!(sigma > 0.0);
        assert_abs_diff_eq!(sigma, d, epsilon = 1e-10);
    }

    #[test]
    fn relative_entropy_support_failure_is_infinite() {
        let pure = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let mixed = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        assert_eq!(relative_entropy(&mixed, &pure).unwrap(), f64::INFINITY);
        assert_abs_diff_eq!(relative_entropy(&pure, &mixed).unwrap(), 2f64.ln(), epsilon = 1e-12);
    }
}
