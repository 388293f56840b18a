use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("matrix has an eigenvalue at -1; principal logarithm branch is ambiguous")]
    BranchAmbiguity,

    #[error("invalid source: {0}")]
    InvalidSource(String),

    #[error("message enumeration needs {needed} strings, cap is {cap}")]
    EnumerationCap { needed: u128, cap: usize },

    #[error("typical set is empty for n = {n}, epsilon = {epsilon}")]
    EmptyTypicalSet { n: usize, epsilon: f64 },

    #[error("typical set of size {typical} does not fit into {kept} kept qubits")]
    Capacity { typical: usize, kept: usize },

    #[error("invalid basis assignment: {0}")]
    InvalidAssignment(String),

    #[error("invalid probe: {0}")]
    InvalidProbe(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("message is outside the typical subspace (atypical weight {0:e})")]
    NotTypical(f64),

    #[error("compression keeps {kept} of {n} qubits; nothing left to append")]
    NegativeAppendCount { n: usize, kept: i64 },
}
