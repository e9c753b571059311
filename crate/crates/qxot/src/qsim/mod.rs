//! Dense pure/mixed state engine for few qubits.
//!
//! Qubit indices are 0-based with qubit 0 as the most significant bit of an
//! amplitude index, so the computational basis states of a two-qubit register
//! are `|00>, |01>, |10>, |11>` at indices 0..3. Protocol modules use 1-based
//! qubit *labels* in transcripts and convert at the boundary.
//!
//! Measurement is modeled by exhaustive branch enumeration
//! ([`measure_branches`]) so protocol correctness can be checked over all
//! outcomes; [`BranchSet::sample`] draws a single branch for end-to-end runs.

mod density;
mod entropy;
mod gate;
mod ket;
mod measure;

pub use density::{trace_distance, DensityOperator};
pub use entropy::{
    hermitian_eigenvalues, holevo_information, measured_mutual_information,
    measured_mutual_information_computational, mutual_information, shannon_entropy,
    von_neumann_entropy, EnsembleEntry, Povm, StateEnsemble,
};
pub use gate::{Gate, GateSpec};
pub use ket::{bell_state, Ket};
pub use measure::{measure_branches, Basis, Branch, BranchSet};
