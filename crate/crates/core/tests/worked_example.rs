//! End-to-end checks on the three-sample `{|0⟩, |+⟩}` source.

use approx::assert_abs_diff_eq;

use thermocoding::coding::{
    average_fidelity_ideal, average_guess_overlap, bit_reversal_assignment, build_encoding_unitary, compress,
    decode, encoding_unitary_from_assignment, ground_append, reference_three_qubit_unitary, AssignmentRule,
    THREE_QUBIT_ASSIGNMENT,
};
use thermocoding::linalg::fidelity_pure_mixed;
use thermocoding::measure::{average_fidelity_thermal, thermal_bound, thermal_bound_tight};
use thermocoding::source::{four_string_epsilon, von_neumann_entropy, source_density};
use thermocoding::{CodingSetup, KeptQubits, PlanOptions, QubitSource};

fn setup(options: PlanOptions) -> CodingSetup {
    let src = QubitSource::zero_plus();
    let eps = four_string_epsilon(&src).unwrap();
    CodingSetup::new(src, 3, eps, &options).unwrap()
}

#[test]
fn source_numbers() {
    let src = QubitSource::zero_plus();
    let c2 = std::f64::consts::FRAC_PI_8.cos().powi(2);
    assert_abs_diff_eq!(src.gamma(0), c2, epsilon = 1e-12);
    assert_abs_diff_eq!(src.entropy(), 0.600_876_0, epsilon = 1e-7);
    assert_abs_diff_eq!(von_neumann_entropy(&source_density(&src)), src.entropy(), epsilon = 1e-12);
}

#[test]
fn typical_set_and_fidelities() {
    let s = setup(PlanOptions::default());
    assert_eq!(s.spec.typical_strings, vec![0b000, 0b001, 0b010, 0b100]);
    assert_abs_diff_eq!(s.spec.delta, 0.058_058_3, epsilon = 1e-7);
    let ens = s.ensemble().unwrap();
    assert_eq!(ens.len(), 8);
    let f = average_fidelity_ideal(&ens, &s.spec, &s.guess).unwrap();
    assert_abs_diff_eq!(f, 0.923_358, epsilon = 1e-6);
    let (amp, sq) = average_guess_overlap(&ens, &s.guess).unwrap();
    assert_abs_diff_eq!(amp, 0.788_58, epsilon = 1e-5);
    assert_abs_diff_eq!(sq, amp * amp, epsilon = 1e-12);
}

#[test]
fn reference_encoder_and_listed_assignment() {
    let src = QubitSource::zero_plus();
    let u = encoding_unitary_from_assignment(&src, 3, &bit_reversal_assignment(3)).unwrap();
    assert!((u.matrix() - reference_three_qubit_unitary()).camax() < 1e-9);

    // the listed eigenstate-to-string table keeps the typical strings on two qubits
    let listed = setup(PlanOptions {
        kept: KeptQubits::Minimal,
        assignment: AssignmentRule::Explicit(THREE_QUBIT_ASSIGNMENT.to_vec()),
    });
    assert_eq!(listed.plan.kept, 2);
    for (psi, _) in &listed.ensemble().unwrap().messages {
        let lam = listed.spec.projector.matrix() * psi.amps();
        let typical = thermocoding::StateVector::from_vector(lam).unwrap();
        let decoded = decode(&compress(&typical, &listed.plan).unwrap(), &ground_append(1), &listed.plan).unwrap();
        assert_abs_diff_eq!(fidelity_pure_mixed(&typical, &decoded).unwrap(), 1.0, epsilon = 1e-10);
    }

    // the reversal table does not: |0'0'1'⟩ lands on |100⟩
    let rev = AssignmentRule::Explicit(bit_reversal_assignment(3).into_iter().enumerate().collect());
    let err = build_encoding_unitary(&src, &listed.spec, &PlanOptions { kept: KeptQubits::Minimal, assignment: rev });
    assert!(err.is_err());
}

#[test]
fn thermal_average_respects_both_bounds() {
    let s = setup(PlanOptions::default());
    let ens = s.ensemble().unwrap();
    let (_, g) = average_guess_overlap(&ens, &s.guess).unwrap();
    for i in 0..=5 {
        let c = 0.5 + 0.1 * i as f64;
        let f = average_fidelity_thermal(&ens, &s.spec, c, &s.guess).unwrap();
        assert!(f >= thermal_bound(c, s.spec.delta) - 1e-12);
        assert!(f >= thermal_bound_tight(c, s.spec.delta, g) - 1e-12);
    }
    let ideal = average_fidelity_ideal(&ens, &s.spec, &s.guess).unwrap();
    assert_abs_diff_eq!(average_fidelity_thermal(&ens, &s.spec, 1.0, &s.guess).unwrap(), ideal, epsilon = 1e-12);
}
