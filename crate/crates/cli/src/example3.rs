//! The three-sample `{|0⟩, |+⟩}` worked example, compared with reference numbers.

use std::fmt;

use anyhow::Result;
use serde::Serialize;

use thermocoding::coding::{
    average_fidelity_ideal, average_guess_overlap, bit_reversal_assignment, encoding_unitary_from_assignment,
    reference_three_qubit_unitary,
};
use thermocoding::source::four_string_epsilon;
use thermocoding::{CodingSetup, PlanOptions, QubitSource};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, value: f64, target: f64, tolerance: f64) -> Self {
        Self { name, value, target, tolerance, passed: (value - target).abs() <= tolerance }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Example3Report {
    pub entropy_bits: f64,
    pub epsilon: f64,
    pub typical_strings: Vec<String>,
    pub kept_qubits: usize,
    pub delta: f64,
    /// Ensemble average of `|⟨ψ_G|ψ⟩|`.
    pub guess_overlap: f64,
    /// Ensemble average of `|⟨ψ_G|ψ⟩|²`.
    pub guess_overlap_sq: f64,
    pub ideal_avg_fidelity: f64,
    /// Largest entrywise deviation of the constructed encoder from the reference matrix.
    pub u_encode_max_dev: f64,
    pub checks: Vec<Check>,
}

impl Example3Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run() -> Result<Example3Report> {
    let src = QubitSource::zero_plus();
    let eps = four_string_epsilon(&src).expect("window exists for this source");
    let s = CodingSetup::new(src, 3, eps, &PlanOptions::default())?;
    let ens = s.ensemble()?;
    let (amp, sq) = average_guess_overlap(&ens, &s.guess)?;
    let fidelity = average_fidelity_ideal(&ens, &s.spec, &s.guess)?;
    let u = encoding_unitary_from_assignment(&s.source, 3, &bit_reversal_assignment(3))?;
    let dev = (u.matrix() - reference_three_qubit_unitary()).camax();
    let checks = vec![
        Check::new("delta", s.spec.delta, 0.058, 0.005),
        Check::new("ideal_avg_fidelity", fidelity, 0.92, 0.01),
        Check::new("guess_overlap", amp, 0.79, 0.005),
        Check::new("u_encode_max_dev", dev, 0.0, 1e-9),
    ];
    Ok(Example3Report {
        entropy_bits: s.source.entropy(),
        epsilon: eps,
        typical_strings: s.spec.typical_strings.iter().map(|t| format!("{t:03b}")).collect(),
        kept_qubits: s.plan.kept,
        delta: s.spec.delta,
        guess_overlap: amp,
        guess_overlap_sq: sq,
        ideal_avg_fidelity: fidelity,
        u_encode_max_dev: dev,
        checks,
    })
}

impl fmt::Display for Example3Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "entropy S          {:.7} bits", self.entropy_bits)?;
        writeln!(f, "epsilon            {:.6}", self.epsilon)?;
        writeln!(f, "typical strings    {}", self.typical_strings.join(" "))?;
        writeln!(f, "kept qubits        {}", self.kept_qubits)?;
        writeln!(f, "delta              {:.7}", self.delta)?;
        writeln!(f, "<|<psi_G|psi>|>    {:.6}", self.guess_overlap)?;
        writeln!(f, "<|<psi_G|psi>|^2>  {:.6}", self.guess_overlap_sq)?;
        writeln!(f, "ideal avg fidelity {:.6}", self.ideal_avg_fidelity)?;
        writeln!(f, "U_encode max dev   {:.3e}", self.u_encode_max_dev)?;
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{verdict} {:<20} {:.6e} (target {} ± {})", c.name, c.value, c.target, c.tolerance)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn report_passes() {
        let r = super::run().unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.kept_qubits, 2);
        assert_eq!(r.typical_strings, ["000", "001", "010", "100"]);
    }
}
