//! Simulation and security analysis toolkit for a family of quantum
//! XOR-oblivious-transfer protocols and the two-party computation schemes
//! built on top of them.
//!
//! The crate is organized around a small dense statevector engine ([`qsim`])
//! that supports exhaustive measurement-branch enumeration, so protocol
//! correctness can be proven over *all* branches rather than sampled. On top
//! of it sit the protocol state machines ([`xot`], [`linear`]), a classical
//! XOR-homomorphic encryption scheme ([`he`]), the documented cheating
//! strategies ([`attack`]), information-leakage quantification ([`leakage`]),
//! and an interactive two-party Clifford+T evaluation scheme ([`interactive`]).

pub mod attack;
pub mod he;
pub mod interactive;
pub mod leakage;
pub mod linear;
pub mod qsim;
pub mod xot;

use thiserror::Error;

/// Error type shared by all modules of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("duplicate qubit index {0} in target list")]
    DuplicateTarget(usize),
    #[error("gate {gate} expects {expected} target(s), got {got}")]
    GateArity {
        gate: String,
        expected: usize,
        got: usize,
    },
    #[error("register of {0} qubits exceeds the supported maximum of {max} qubits", max = MAX_QUBITS)]
    TooManyQubits(usize),
    #[error("amplitude vector of length {len} is not 2^{num_qubits}")]
    BadAmplitudeLength { len: usize, num_qubits: usize },
    #[error("state norm {0} is not 1 within tolerance")]
    NotNormalized(f64),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("empty target list")]
    EmptyTargets,
    #[error("matrix is not a valid density operator: {0}")]
    InvalidDensity(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("keys inconsistent with input bits: {0}")]
    InvalidKeys(String),
    #[error("bit value {0} is not 0 or 1")]
    InvalidBit(u8),
    #[error("value {value} out of range for {what}")]
    OutOfRange { what: String, value: u64 },
    #[error("input length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("returned state has weight {0:.3e} outside the measurement subspace")]
    OutsideSubspace(f64),
    #[error("ciphertext modulus does not match key modulus")]
    ModulusMismatch,
    #[error("ciphertext is not coprime to the modulus")]
    NotCoprime,
    #[error("prime search exhausted after {0} attempts")]
    PrimeSearchExhausted(usize),
    #[error("prime size of {0} bits is below the minimum of 8")]
    PrimeBitsTooSmall(usize),
    #[error("variant {variant} is not supported for {operation}")]
    UnsupportedVariant { variant: String, operation: String },
    #[error("problem size n={n} exceeds the dense-computation cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("non-Clifford gate {0} in a Clifford stage")]
    NonClifford(String),
    #[error("internal consistency check failed: {0}")]
    InternalCheck(String),
    #[error("invalid attack configuration: {0}")]
    InvalidAttack(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Hard cap on register sizes; everything in this crate is dense.
pub const MAX_QUBITS: usize = 12;

/// Numerical tolerances used across the crate.
///
/// All comparison thresholds live here so tests, library code and the CLI
/// agree on what "equal" means.
pub mod tol {
    /// State-vector norm must match 1 within this bound.
    pub const NORM: f64 = 1e-12;
    /// Branch/ensemble probabilities must sum to 1 within this bound.
    pub const PROB: f64 = 1e-10;
    /// Hermiticity / trace checks on density operators.
    pub const HERMITIAN: f64 = 1e-12;
    /// Density-operator eigenvalues may undershoot 0 by at most this much.
    pub const PSD: f64 = 1e-10;
    /// Eigenvalues below this cutoff are treated as exactly 0 in entropies.
    pub const EIG_CUTOFF: f64 = 1e-12;
    /// Measurement branches with probability below this are omitted.
    pub const BRANCH_PRUNE: f64 = 1e-12;
    /// POVM validity (PSD effects, completeness).
    pub const POVM: f64 = 1e-10;
    /// Weight outside the expected measurement subspace tolerated in
    /// honest-mode decoding.
    pub const SUBSPACE: f64 = 1e-10;
}

/// Tolerance overrides carried by run configurations.
///
/// Defaults mirror [`tol`]; the CLI may tighten or relax the check
/// thresholds it applies to run outputs.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub norm: f64,
    pub prob: f64,
    pub entropy_eig_cutoff: f64,
    pub trace_distance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: tol::NORM,
            prob: tol::PROB,
            entropy_eig_cutoff: tol::EIG_CUTOFF,
            trace_distance: tol::PROB,
        }
    }
}
