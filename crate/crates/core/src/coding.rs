//! The ideal Schumacher protocol: encode, discard, append, decode, and the
//! guess-state fallback for atypical outcomes.

use crate::error::{Error, Result};
use crate::linalg::{
    kron_power, partial_trace_matrix, CMatrix, DensityMatrix, Operator, StateVector, Tensor, C64,
};
use crate::source::{build_typical_spec, enumerate_messages, MessageEnsemble, QubitSource, TypicalSpec};

/// How many qubits survive compression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KeptQubits {
    /// `⌈log₂ |T|⌉`, the fewest qubits that can hold the typical subspace.
    Minimal,
    /// `⌈nS + ε⌉`, capped at `n`.
    EntropyFormula,
    Explicit(usize),
}

/// How eigen-strings are mapped onto computational strings.
#[derive(Debug, Clone, PartialEq)]
pub enum AssignmentRule {
    /// Typical strings by descending eigenvalue (ties lexicographic) onto the
    /// computational strings whose last `J` bits are zero, in lexicographic
    /// order; atypical strings fill the rest the same way.
    Canonical,
    /// `(eigen-string, computational string)` pairs covering every string.
    Explicit(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOptions {
    pub kept: KeptQubits,
    pub assignment: AssignmentRule,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self { kept: KeptQubits::Minimal, assignment: AssignmentRule::Canonical }
    }
}

#[derive(Debug, Clone)]
pub struct EncodingPlan {
    pub n: usize,
    /// Kept qubits `m`.
    pub kept: usize,
    /// Discarded (and later appended) qubits `J = n - m`.
    pub discarded: usize,
    /// `assignment[s]` is the computational string receiving eigen-string `s`.
    pub assignment: Vec<usize>,
    pub unitary: Operator,
}

impl EncodingPlan {
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Projector onto computational strings whose last `J` bits are zero.
    pub fn prefix_projector(&self) -> CMatrix {
        let mask = (1usize << self.discarded) - 1;
        CMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r == c && r & mask == 0 {
                C64::from(1.0)
            } else {
                C64::from(0.0)
            }
        })
    }
}

/// `U = Σ_s |assignment[s]⟩⟨s'|` over the full eigenbasis.
pub fn encoding_unitary_from_assignment(src: &QubitSource, n: usize, assignment: &[usize]) -> Result<Operator> {
    let dim = 1usize << n;
    check_permutation(assignment, dim)?;
    let basis = src.eigenbasis(n);
    let mut u = CMatrix::zeros(dim, dim);
    for (s, &c) in assignment.iter().enumerate() {
        u.set_row(c, &basis.column(s).adjoint());
    }
    Operator::unitary(u)
}

fn check_permutation(assignment: &[usize], dim: usize) -> Result<()> {
    if assignment.len() != dim {
        return Err(Error::InvalidAssignment(format!("{} entries for dimension {dim}", assignment.len())));
    }
    let mut seen = vec![false; dim];
    for &c in assignment {
        if c >= dim || std::mem::replace(&mut seen[c], true) {
            return Err(Error::InvalidAssignment(format!("target {c} is out of range or repeated")));
        }
    }
    Ok(())
}

fn kept_qubits(src: &QubitSource, spec: &TypicalSpec, rule: KeptQubits) -> Result<usize> {
    let n = spec.n;
    let m = match rule {
        KeptQubits::Minimal => spec.typical_strings.len().next_power_of_two().trailing_zeros() as usize,
        KeptQubits::EntropyFormula => {
            ((n as f64 * src.entropy() + spec.epsilon).ceil().max(0.0) as usize).min(n)
        }
        KeptQubits::Explicit(m) if m <= n => m,
        KeptQubits::Explicit(m) => {
            return Err(Error::OutOfRange(format!("cannot keep {m} of {n} qubits")));
        }
    };
    if spec.typical_strings.len() > 1usize << m {
        return Err(Error::Capacity { typical: spec.typical_strings.len(), kept: m });
    }
    Ok(m)
}

fn canonical_assignment(src: &QubitSource, spec: &TypicalSpec, discarded: usize) -> Vec<usize> {
    let n = spec.n;
    let dim = 1usize << n;
    let mask = (1usize << discarded) - 1;
    let by_weight = |strings: &mut Vec<usize>| {
        strings.sort_by(|&a, &b| {
            src.string_eigenvalue(n, b)
                .total_cmp(&src.string_eigenvalue(n, a))
                .then(a.cmp(&b))
        })
    };
    let mut typical = spec.typical_strings.clone();
    let mut atypical: Vec<usize> = (0..dim).filter(|&s| !spec.is_typical(s)).collect();
    by_weight(&mut typical);
    by_weight(&mut atypical);

    let mut targets: Vec<usize> = (0..dim).filter(|c| c & mask == 0).collect();
    let rest = (0..dim).filter(|c| c & mask != 0);
    // prefix slots not needed by typical strings are handed to atypical ones first
    let spare = targets.split_off(typical.len());
    let fill: Vec<usize> = spare.into_iter().chain(rest).collect();

    let mut assignment = vec![0; dim];
    for (s, c) in typical.into_iter().zip(targets) {
        assignment[s] = c;
    }
    for (s, c) in atypical.into_iter().zip(fill) {
        assignment[s] = c;
    }
    assignment
}

pub fn build_encoding_unitary(src: &QubitSource, spec: &TypicalSpec, options: &PlanOptions) -> Result<EncodingPlan> {
    let n = spec.n;
    let kept = kept_qubits(src, spec, options.kept)?;
    let discarded = n - kept;
    let assignment = match &options.assignment {
        AssignmentRule::Canonical => canonical_assignment(src, spec, discarded),
        AssignmentRule::Explicit(pairs) => {
            let dim = 1usize << n;
            let mut a = vec![usize::MAX; dim];
            for &(s, c) in pairs {
                if s >= dim || a[s] != usize::MAX {
                    return Err(Error::InvalidAssignment(format!("source string {s} out of range or repeated")));
                }
                a[s] = c;
            }
            if a.contains(&usize::MAX) {
                return Err(Error::InvalidAssignment("assignment does not cover every eigen-string".into()));
            }
            a
        }
    };
    let mask = (1usize << discarded) - 1;
    if let Some(&s) = spec.typical_strings.iter().find(|&&s| assignment[s] & mask != 0) {
        return Err(Error::InvalidAssignment(format!(
            "typical string {s:0n$b} maps to {:0n$b}, outside the kept qubits",
            assignment[s]
        )));
    }
    let unitary = encoding_unitary_from_assignment(src, n, &assignment)?;
    Ok(EncodingPlan { n, kept, discarded, assignment, unitary })
}

/// Reduced state of the first `m` qubits of `U|ψ⟩`.
pub fn compress(message: &StateVector, plan: &EncodingPlan) -> Result<DensityMatrix> {
    let rotated = message.evolve(&plan.unitary)?;
    let reduced = partial_trace_matrix(&rotated.outer(), &[0], &[1 << plan.kept, 1 << plan.discarded])?;
    DensityMatrix::from_channel_output(reduced)
}

/// `U†(compressed ⊗ append)U`
pub fn decode(compressed: &DensityMatrix, append: &DensityMatrix, plan: &EncodingPlan) -> Result<DensityMatrix> {
    if compressed.dim() != 1 << plan.kept {
        return Err(Error::DimensionMismatch { expected: 1 << plan.kept, got: compressed.dim() });
    }
    if append.dim() != 1 << plan.discarded {
        return Err(Error::DimensionMismatch { expected: 1 << plan.discarded, got: append.dim() });
    }
    compressed.tensor(append).conjugate_by(&plan.unitary.adjoint().into_matrix())
}

/// `|0⟩⟨0|^⊗J`
pub fn ground_append(j: usize) -> DensityMatrix {
    let zero = StateVector::basis(2, 0).expect("basis ket").outer();
    DensityMatrix::new(kron_power(&zero, j)).expect("pure product state")
}

/// Highest-weight eigenket `|0'⟩^⊗n`; for `γ₀ = γ₁` the lowest index wins.
pub fn guess_state(src: &QubitSource, n: usize) -> StateVector {
    src.eigen_string_ket(n, 0)
}

/// `ΛψψΛ + ⟨ψ|Λ^⊥|ψ⟩ |ψ_G⟩⟨ψ_G|`
pub fn received_ensemble_ideal(message: &StateVector, spec: &TypicalSpec, guess: &StateVector) -> Result<DensityMatrix> {
    let lam = spec.projector.matrix();
    let projected = lam * message.amps();
    let atypical = 1.0 - spec.typical_weight(message)?;
    if guess.dim() != message.dim() {
        return Err(Error::DimensionMismatch { expected: message.dim(), got: guess.dim() });
    }
    let m = &projected * projected.adjoint() + guess.outer() * C64::from(atypical);
    DensityMatrix::from_channel_output(m)
}

/// `|⟨ψ|Λ|ψ⟩|² + ⟨ψ|Λ^⊥|ψ⟩ |⟨ψ_G|ψ⟩|²`
pub fn protocol_fidelity_ideal(message: &StateVector, spec: &TypicalSpec, guess: &StateVector) -> Result<f64> {
    let x = spec.typical_weight(message)?;
    let g = guess.inner(message)?.norm_sqr();
    Ok(x * x + (1.0 - x) * g)
}

pub fn average_fidelity_ideal(ensemble: &MessageEnsemble, spec: &TypicalSpec, guess: &StateVector) -> Result<f64> {
    ensemble.average(|psi| protocol_fidelity_ideal(psi, spec, guess))
}

/// Ensemble averages of `|⟨ψ_G|ψ⟩|` and `|⟨ψ_G|ψ⟩|²`.
pub fn average_guess_overlap(ensemble: &MessageEnsemble, guess: &StateVector) -> Result<(f64, f64)> {
    let amp = ensemble.average(|psi| Ok(guess.inner(psi)?.norm()))?;
    let sq = ensemble.average(|psi| Ok(guess.inner(psi)?.norm_sqr()))?;
    Ok((amp, sq))
}

/// Source, typical subspace, encoding plan and guess state for one block length.
#[derive(Debug, Clone)]
pub struct CodingSetup {
    pub source: QubitSource,
    pub spec: TypicalSpec,
    pub plan: EncodingPlan,
    pub guess: StateVector,
}

impl CodingSetup {
    pub fn new(source: QubitSource, n: usize, epsilon: f64, options: &PlanOptions) -> Result<Self> {
        let spec = build_typical_spec(&source, n, epsilon)?;
        let plan = build_encoding_unitary(&source, &spec, options)?;
        let guess = guess_state(&source, n);
        Ok(Self { source, spec, plan, guess })
    }

    pub fn ensemble(&self) -> Result<MessageEnsemble> {
        enumerate_messages(&self.source, self.spec.n)
    }
}

/// Eigen-string to computational-string pairs listed for the three-sample
/// `{|0⟩, |+⟩}` example; the typical strings land on the first two qubits.
pub const THREE_QUBIT_ASSIGNMENT: [(usize, usize); 8] = [
    (0b000, 0b000),
    (0b001, 0b110),
    (0b010, 0b010),
    (0b100, 0b100),
    (0b011, 0b101),
    (0b101, 0b011),
    (0b110, 0b001),
    (0b111, 0b111),
];

/// `s ↦ s` with its `n` bits reversed.
pub fn bit_reversal_assignment(n: usize) -> Vec<usize> {
    (0..1usize << n).map(|s| s.reverse_bits() >> (usize::BITS as usize - n)).collect()
}

/// Published 8×8 encoder for the three-sample `{|0⟩, |+⟩}` example. Entry
/// code `±(k+1)` stands for `±cos^{3-k}(π/8) sin^k(π/8)`.
pub fn reference_three_qubit_unitary() -> CMatrix {
    #[rustfmt::skip]
    const CODES: [i8; 64] = [
         1,  2,  2,  3,  2,  3,  3,  4,
         2,  3,  3,  4, -1, -2, -2, -3,
         2,  3, -1, -2,  3,  4, -2, -3,
         3,  4, -2, -3, -2, -3,  1,  2,
         2, -1,  3, -2,  3, -2,  4, -3,
         3, -2,  4, -3, -2,  1, -3,  2,
         3, -2, -2,  1,  4, -3, -3,  2,
         4, -3, -3,  2, -3,  2,  2, -1,
    ];
    let (s, c) = (std::f64::consts::FRAC_PI_8.sin(), std::f64::consts::FRAC_PI_8.cos());
    CMatrix::from_fn(8, 8, |r, col| {
        let code = CODES[8 * r + col];
        let k = (code.unsigned_abs() - 1) as i32;
        C64::from(code.signum() as f64 * c.powi(3 - k) * s.powi(k))
    })
}
