//! Schumacher compression of small i.i.d. qubit sources under finite
//! thermodynamic resources: a thermal measurement probe, noisy clocks,
//! thermal ancillas, and the cooling cost of preparing them.
//!
//! Everything is dense linear algebra on at most a few hundred dimensions.

pub mod append;
pub mod coding;
pub mod cooling;
pub mod error;
pub mod haar;
pub mod linalg;
pub mod measure;
pub mod source;
pub mod timing;

pub use coding::{CodingSetup, EncodingPlan, KeptQubits, PlanOptions};
pub use error::{Error, Result};
pub use haar::McEstimate;
pub use linalg::{CMatrix, CVector, DensityMatrix, Operator, OperatorKind, StateVector, Tensor, C64};
pub use measure::ThermalProbe;
pub use source::{MessageEnsemble, QubitSource, TypicalSpec};
pub use timing::{ClockSpec, GeneratorSpec};
