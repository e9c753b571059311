//! Honest-party state machines and end-to-end runners for the three XOR
//! oblivious transfer protocol variants.
//!
//! In every variant Alice holds input bits `(x1, x2)`, Bob holds `(y1, y2)`,
//! and Alice ends up with `x1*y1 XOR x2*y2` while her input stays perfectly
//! hidden from Bob.
//!
//! * `P1` - Alice sends three qubits: a Bell pair on two positions picked by
//!   her input, plus a `|+>`/`|->` filler. Bob phase-rotates with a
//!   four-valued key, measures in the X basis, and reports the bits.
//! * `P2` - two qubits encoding a superposition of two basis labels; Bob
//!   expands them with a parity qubit before measuring.
//! * `P2b` - the same two-qubit encoding, but Bob applies diagonal gates and
//!   returns the qubits for Alice to measure herself.
//!
//! Qubit labels in transcripts are 1-based; the underlying simulator indices
//! are 0-based.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::qsim::{bell_state, measure_branches, Basis, BranchSet, Gate, GateSpec, Ket};
use crate::{Error, Result};

/// Protocol variant tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XotVariant {
    P1,
    P2,
    P2b,
}

impl std::fmt::Display for XotVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            XotVariant::P1 => write!(f, "p1"),
            XotVariant::P2 => write!(f, "p2"),
            XotVariant::P2b => write!(f, "p2b"),
        }
    }
}

impl std::str::FromStr for XotVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(XotVariant::P1),
            "p2" => Ok(XotVariant::P2),
            "p2b" => Ok(XotVariant::P2b),
            other => Err(Error::UnsupportedVariant {
                variant: other.to_string(),
                operation: "variant parse".into(),
            }),
        }
    }
}

/// The three non-zero input pairs, used for the zero-input substitution.
pub const NONZERO_INPUTS: [(u8, u8); 3] = [(0, 1), (1, 0), (1, 1)];

/// Alice's per-instance secret keys.
///
/// `effective_x` is the input pair actually encoded: equal to `(x1, x2)`
/// unless both bits are zero, in which case a uniformly random non-zero pair
/// is substituted (and the decode step ignores the outcome).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliceKeys {
    pub s1: u8,
    pub s2: u8,
    pub s3: u8,
    pub effective_x: (u8, u8),
}

impl AliceKeys {
    pub fn new(x: (u8, u8), s1: u8, s2: u8, s3: u8, effective_x: (u8, u8)) -> Result<Self> {
        let keys = Self {
            s1: s1 & 1,
            s2: s2 & 1,
            s3: s3 & 1,
            effective_x,
        };
        keys.check_consistent(x)?;
        Ok(keys)
    }

    /// Uniform keys; zero inputs draw a fresh substitution.
    pub fn sample<R: Rng + ?Sized>(x: (u8, u8), rng: &mut R) -> Self {
        let effective_x = if x == (0, 0) {
            NONZERO_INPUTS[rng.gen_range(0..3)]
        } else {
            x
        };
        Self {
            s1: rng.gen_range(0..2),
            s2: rng.gen_range(0..2),
            s3: rng.gen_range(0..2),
            effective_x,
        }
    }

    /// All key assignments consistent with `x`, including every zero-input
    /// substitution. 8 entries for non-zero `x`, 24 for `x = (0,0)`.
    pub fn enumerate(x: (u8, u8)) -> Vec<Self> {
        let effectives: Vec<(u8, u8)> = if x == (0, 0) {
            NONZERO_INPUTS.to_vec()
        } else {
            vec![x]
        };
        let mut out = Vec::new();
        for eff in effectives {
            for bits in 0u8..8 {
                out.push(Self {
                    s1: bits & 1,
                    s2: (bits >> 1) & 1,
                    s3: (bits >> 2) & 1,
                    effective_x: eff,
                });
            }
        }
        out
    }

    pub fn check_consistent(&self, x: (u8, u8)) -> Result<()> {
        if x != (0, 0) && self.effective_x != x {
            return Err(Error::InvalidKeys(format!(
                "effective_x {:?} differs from non-zero input {:?}",
                self.effective_x, x
            )));
        }
        if self.effective_x == (0, 0) {
            return Err(Error::InvalidKeys("effective_x must be non-zero".into()));
        }
        Ok(())
    }
}

/// Bob's per-instance secret keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "variant")]
pub enum BobKeys {
    /// Four-valued key `k = 2*k1 + k0`.
    P1 { k: u8 },
    P2 { k0: u8, k1: u8 },
    P2b { k0: u8 },
}

impl BobKeys {
    pub fn sample<R: Rng + ?Sized>(variant: XotVariant, rng: &mut R) -> Self {
        match variant {
            XotVariant::P1 => BobKeys::P1 {
                k: rng.gen_range(0..4),
            },
            XotVariant::P2 => BobKeys::P2 {
                k0: rng.gen_range(0..2),
                k1: rng.gen_range(0..2),
            },
            XotVariant::P2b => BobKeys::P2b {
                k0: rng.gen_range(0..2),
            },
        }
    }

    pub fn enumerate(variant: XotVariant) -> Vec<Self> {
        match variant {
            XotVariant::P1 => (0..4).map(|k| BobKeys::P1 { k }).collect(),
            XotVariant::P2 => (0..4)
                .map(|b| BobKeys::P2 {
                    k0: b & 1,
                    k1: (b >> 1) & 1,
                })
                .collect(),
            XotVariant::P2b => (0..2).map(|k0| BobKeys::P2b { k0 }).collect(),
        }
    }

    pub fn k0(&self) -> u8 {
        match *self {
            BobKeys::P1 { k } => k % 2,
            BobKeys::P2 { k0, .. } => k0,
            BobKeys::P2b { k0 } => k0,
        }
    }
}

/// Record of which positions Alice's encoding occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PickRecord {
    /// 1-based qubit labels carrying the Bell pair (variant P1).
    BellPair { first: usize, second: usize },
    /// Two-qubit basis labels in `{0..3}` carrying the superposition
    /// (variants P2/P2b).
    BasisPair { a: u8, b: u8 },
}

/// Qubit labels picked for a non-zero input pair: `(1,0) -> {1,3}`,
/// `(0,1) -> {2,3}`, `(1,1) -> {1,2}`.
///
/// The same positions carry the signal in all three variants: for P2/P2b
/// they are the labels of the encoding basis states when `s1 = 0` and the
/// complement labels when `s1 = 1`, which coincide.
pub fn pick_labels(effective_x: (u8, u8)) -> Result<(usize, usize)> {
    match effective_x {
        (1, 0) => Ok((1, 3)),
        (0, 1) => Ok((2, 3)),
        (1, 1) => Ok((1, 2)),
        other => Err(Error::InvalidKeys(format!(
            "no qubit pick for input {other:?}"
        ))),
    }
}

/// Basis labels of the two-qubit encoding for P2/P2b.
fn p2_basis_labels(effective_x: (u8, u8), s1: u8) -> Result<(u8, u8)> {
    match (s1 & 1, effective_x) {
        (0, (1, 0)) => Ok((1, 3)),
        (0, (0, 1)) => Ok((2, 3)),
        (0, (1, 1)) => Ok((1, 2)),
        (1, (1, 0)) => Ok((0, 2)),
        (1, (0, 1)) => Ok((0, 1)),
        (1, (1, 1)) => Ok((0, 3)),
        (_, other) => Err(Error::InvalidKeys(format!(
            "no basis labels for input {other:?}"
        ))),
    }
}

fn gate(g: Gate, targets: &[usize]) -> GateSpec {
    GateSpec::new(g, targets.to_vec()).expect("static gate construction")
}

/// Assembles a three-qubit state from a two-qubit state on the 1-based
/// labels `(first, second)` and a single-qubit state on the remaining label.
pub(crate) fn assemble_three(
    pair_state: &Ket,
    first: usize,
    second: usize,
    single_state: &Ket,
) -> Result<Ket> {
    let spare = 6 - first - second;
    let mut amps = vec![num_complex::Complex64::ZERO; 8];
    for (pi, pa) in pair_state.amplitudes().iter().enumerate() {
        for (si, sa) in single_state.amplitudes().iter().enumerate() {
            let mut idx = 0usize;
            idx |= (pi >> 1) << (3 - first);
            idx |= (pi & 1) << (3 - second);
            idx |= si << (3 - spare);
            amps[idx] = pa * sa;
        }
    }
    Ket::from_amplitudes(3, amps)
}

/// P1 step 1: Bell pair on the picked labels, `|+>`/`|->` on the
/// remaining qubit, assembled in label order 1,2,3.
pub fn p1_encode(x: (u8, u8), keys: &AliceKeys) -> Result<(Ket, PickRecord)> {
    keys.check_consistent(x)?;
    let (first, second) = pick_labels(keys.effective_x)?;
    let pair = bell_state((keys.s1, keys.s2));
    let single = Ket::plus_minus(keys.s3);
    Ok((
        assemble_three(&pair, first, second, &single)?,
        PickRecord::BellPair { first, second },
    ))
}

/// P1 step 2: `Z^{y1}` on qubit 1, `Z^{y2}` on qubit 2,
/// `Rz(k*pi/2)` on all three, then an X-basis measurement of all three.
/// Returns every branch together with the disclosed bit `k0 = k mod 2`.
pub fn p1_bob_step(state: &Ket, y: (u8, u8), k: u8) -> Result<(BranchSet, u8)> {
    if k > 3 {
        return Err(Error::OutOfRange {
            what: "P1 key k".into(),
            value: k as u64,
        });
    }
    let mut s = state.clone();
    if y.0 & 1 == 1 {
        s.apply_mut(&gate(Gate::Z, &[0]))?;
    }
    if y.1 & 1 == 1 {
        s.apply_mut(&gate(Gate::Z, &[1]))?;
    }
    let theta = k as f64 * std::f64::consts::FRAC_PI_2;
    for q in 0..3 {
        s.apply_mut(&gate(Gate::Rz(theta), &[q]))?;
    }
    let branches = measure_branches(&s, &[0, 1, 2], Basis::X)?;
    Ok((branches, k % 2))
}

/// P1 step 3: zero inputs output 0; otherwise XOR the two picked
/// outcome bits into `r0` and output `r0 XOR s2 XOR (s1 AND k0)`.
pub fn p1_decode(
    x: (u8, u8),
    keys: &AliceKeys,
    pick: &PickRecord,
    outcomes: &[u8],
    k0: u8,
) -> Result<u8> {
    keys.check_consistent(x)?;
    if outcomes.len() != 3 {
        return Err(Error::LengthMismatch {
            expected: 3,
            got: outcomes.len(),
        });
    }
    let (first, second) = match *pick {
        PickRecord::BellPair { first, second } => (first, second),
        PickRecord::BasisPair { .. } => {
            return Err(Error::InvalidKeys(
                "P1 decode needs a Bell-pair pick record".into(),
            ))
        }
    };
    if (first, second) != pick_labels(keys.effective_x)? {
        return Err(Error::InvalidKeys(format!(
            "pick {{{first},{second}}} disagrees with effective input {:?}",
            keys.effective_x
        )));
    }
    if x == (0, 0) {
        return Ok(0);
    }
    let r0 = (outcomes[first - 1] ^ outcomes[second - 1]) & 1;
    Ok(r0 ^ keys.s2 ^ (keys.s1 & k0))
}

/// P2 step 1: the two-qubit superposition
/// `(|a> + (-1)^{s2} |b>)/sqrt(2)` with `(a, b)` selected by
/// `(effective_x, s1)`.
pub fn p2_encode(x: (u8, u8), keys: &AliceKeys) -> Result<(Ket, PickRecord)> {
    keys.check_consistent(x)?;
    let (a, b) = p2_basis_labels(keys.effective_x, keys.s1)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if keys.s2 & 1 == 1 { -r } else { r };
    let mut amps = vec![num_complex::Complex64::ZERO; 4];
    amps[a as usize] = num_complex::Complex64::new(r, 0.0);
    amps[b as usize] = num_complex::Complex64::new(sign, 0.0);
    Ok((
        Ket::from_amplitudes(2, amps)?,
        PickRecord::BasisPair { a, b },
    ))
}

/// P2 step 2: append a parity qubit via two CNOTs, apply
/// `Z^{y1}`/`Z^{y2}`, rotate everything by `Rz(k0*pi/2)`, measure all three
/// qubits in the X basis, and flip every reported bit when `k1 = 1`.
///
/// Branch outcome bits are the bits Bob reports, i.e. after the `k1` flip;
/// post-measurement states are the physical ones.
pub fn p2_bob_step(state: &Ket, y: (u8, u8), k0: u8, k1: u8) -> Result<(BranchSet, u8)> {
    let mut s = state.tensor(&Ket::basis_bit(0))?;
    s.apply_mut(&gate(Gate::Cnot, &[0, 2]))?;
    s.apply_mut(&gate(Gate::Cnot, &[1, 2]))?;
    if y.0 & 1 == 1 {
        s.apply_mut(&gate(Gate::Z, &[0]))?;
    }
    if y.1 & 1 == 1 {
        s.apply_mut(&gate(Gate::Z, &[1]))?;
    }
    let theta = (k0 & 1) as f64 * std::f64::consts::FRAC_PI_2;
    for q in 0..3 {
        s.apply_mut(&gate(Gate::Rz(theta), &[q]))?;
    }
    let mut branches = measure_branches(&s, &[0, 1, 2], Basis::X)?;
    if k1 & 1 == 1 {
        for b in &mut branches.branches {
            for bit in &mut b.outcomes {
                *bit ^= 1;
            }
        }
    }
    Ok((branches, k0 & 1))
}

/// P2 step 3: identical shape to [`p1_decode`]; the picked outcome
/// positions are the encoding labels for `s1 = 0` and the complement labels
/// for `s1 = 1`, which both reduce to [`pick_labels`] of the input.
pub fn p2_decode(
    x: (u8, u8),
    keys: &AliceKeys,
    pick: &PickRecord,
    outcomes: &[u8],
    k0: u8,
) -> Result<u8> {
    keys.check_consistent(x)?;
    if outcomes.len() != 3 {
        return Err(Error::LengthMismatch {
            expected: 3,
            got: outcomes.len(),
        });
    }
    match *pick {
        PickRecord::BasisPair { a, b } => {
            if (a, b) != p2_basis_labels(keys.effective_x, keys.s1)? {
                return Err(Error::InvalidKeys(format!(
                    "basis pick ({a},{b}) disagrees with keys"
                )));
            }
        }
        PickRecord::BellPair { .. } => {
            return Err(Error::InvalidKeys(
                "P2 decode needs a basis-pair pick record".into(),
            ))
        }
    }
    if x == (0, 0) {
        return Ok(0);
    }
    let (first, second) = pick_labels(keys.effective_x)?;
    let r0 = (outcomes[first - 1] ^ outcomes[second - 1]) & 1;
    Ok(r0 ^ keys.s2 ^ (keys.s1 & k0))
}

/// P2b step 2: `Z^{y1}`/`Z^{y2}`, then a `(-1)^{k0}` phase on the
/// `|00>` basis state (realized as X(x)X . CZ . X(x)X), after which the two
/// qubits travel back to Alice.
pub fn p2b_bob_step(state: &Ket, y: (u8, u8), k0: u8) -> Result<(Ket, u8)> {
    let mut s = state.clone();
    if y.0 & 1 == 1 {
        s.apply_mut(&gate(Gate::Z, &[0]))?;
    }
    if y.1 & 1 == 1 {
        s.apply_mut(&gate(Gate::Z, &[1]))?;
    }
    if k0 & 1 == 1 {
        s.apply_mut(&gate(Gate::X, &[0]))?;
        s.apply_mut(&gate(Gate::X, &[1]))?;
        s.apply_mut(&gate(Gate::Cz, &[0, 1]))?;
        s.apply_mut(&gate(Gate::X, &[0]))?;
        s.apply_mut(&gate(Gate::X, &[1]))?;
    }
    Ok((s, k0 & 1))
}

/// Alice's two-outcome measurement of the returned qubits in the basis
/// `{(|a> + (-1)^{s2} |b>)/sqrt(2), (|a> - (-1)^{s2} |b>)/sqrt(2)}`.
/// Outcome bit `r = 0` means the result matched her input state.
///
/// Errors if the returned state carries more than [`crate::tol::SUBSPACE`]
/// weight outside the two-dimensional encoding subspace, which an honest
/// Bob can never cause.
pub fn p2b_measure(returned: &Ket, keys: &AliceKeys, pick: &PickRecord) -> Result<BranchSet> {
    let (a, b) = match *pick {
        PickRecord::BasisPair { a, b } => (a, b),
        PickRecord::BellPair { .. } => {
            return Err(Error::InvalidKeys(
                "P2b decode needs a basis-pair pick record".into(),
            ))
        }
    };
    if returned.num_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            left: returned.dim(),
            right: 4,
        });
    }
    let amps = returned.amplitudes();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if keys.s2 & 1 == 1 { -1.0 } else { 1.0 };
    // <u|psi> and <w|psi> for u = (|a> + (-1)^{s2}|b>)/sqrt(2), w the
    // orthogonal partner.
    let alpha = (amps[a as usize] + amps[b as usize] * sign) * r;
    let beta = (amps[a as usize] - amps[b as usize] * sign) * r;
    let outside = 1.0 - alpha.norm_sqr() - beta.norm_sqr();
    if outside > crate::tol::SUBSPACE {
        return Err(Error::OutsideSubspace(outside));
    }
    let mut branches = Vec::new();
    for (bit, weight, sgn) in [(0u8, alpha.norm_sqr(), sign), (1u8, beta.norm_sqr(), -sign)] {
        if weight > crate::tol::BRANCH_PRUNE {
            let mut post = vec![num_complex::Complex64::ZERO; 4];
            post[a as usize] = num_complex::Complex64::new(r, 0.0);
            post[b as usize] = num_complex::Complex64::new(sgn * r, 0.0);
            branches.push(crate::qsim::Branch {
                outcomes: vec![bit],
                probability: weight,
                post_state: Ket::from_amplitudes(2, post)?,
            });
        }
    }
    Ok(BranchSet { branches })
}

/// Output bit for a measured `r`: `r XOR (s1 AND k0)`; zero inputs output 0.
pub fn p2b_output(x: (u8, u8), keys: &AliceKeys, r: u8, k0: u8) -> u8 {
    if x == (0, 0) {
        0
    } else {
        (r ^ (keys.s1 & k0)) & 1
    }
}

/// P2b step 3 for honest runs: the measurement must be
/// deterministic (a single branch); returns the branch set plus the decoded
/// output.
pub fn p2b_decode(
    returned: &Ket,
    x: (u8, u8),
    keys: &AliceKeys,
    pick: &PickRecord,
    k0: u8,
) -> Result<(BranchSet, u8)> {
    keys.check_consistent(x)?;
    let branches = p2b_measure(returned, keys, pick)?;
    if branches.branches.len() != 1 {
        return Err(Error::InternalCheck(
            "honest P2b measurement produced more than one branch".into(),
        ));
    }
    let r = branches.branches[0].outcomes[0];
    let out = p2b_output(x, keys, r, k0);
    Ok((branches, out))
}

/// Message direction in a transcript.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AliceToBob,
    BobToAlice,
}

/// A transcript entry: qubit payloads are recorded by label only, classical
/// bits by value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "payload")]
pub enum Payload {
    Qubits { labels: Vec<usize> },
    Bits { bits: Vec<u8> },
    /// Encrypted bits in the homomorphic hybrid, recorded by count.
    Ciphertexts { count: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub dir: Direction,
    #[serde(flatten)]
    pub payload: Payload,
}

/// A complete honest protocol run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XotRun {
    pub variant: XotVariant,
    pub seed: u64,
    pub x: (u8, u8),
    pub y: (u8, u8),
    pub alice_keys: AliceKeys,
    pub bob_keys: BobKeys,
    pub pick: PickRecord,
    /// Bits Bob reported (P1/P2) or Alice's measured `r` (P2b).
    pub outcomes: Vec<u8>,
    pub output: u8,
    pub messages: Vec<Message>,
}

impl XotRun {
    /// Transcript in the documented JSON shape with sorted keys.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "variant": self.variant,
            "seed": self.seed,
            "alice": { "x": [self.x.0, self.x.1], "keys": self.alice_keys },
            "bob": { "y": [self.y.0, self.y.1], "keys": self.bob_keys },
            "messages": self.messages,
            "output": self.output,
        })
    }
}

fn check_bits(pair: (u8, u8)) -> Result<()> {
    for b in [pair.0, pair.1] {
        if b > 1 {
            return Err(Error::InvalidBit(b));
        }
    }
    Ok(())
}

/// Samples keys, executes one end-to-end honest run of the chosen variant,
/// draws a single measurement branch, and records the full transcript.
pub fn run_xot(variant: XotVariant, x: (u8, u8), y: (u8, u8), seed: u64) -> Result<XotRun> {
    check_bits(x)?;
    check_bits(y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alice_keys = AliceKeys::sample(x, &mut rng);
    let bob_keys = BobKeys::sample(variant, &mut rng);
    let mut messages = Vec::new();

    let (state, pick) = match variant {
        XotVariant::P1 => p1_encode(x, &alice_keys)?,
        XotVariant::P2 | XotVariant::P2b => p2_encode(x, &alice_keys)?,
    };
    let qubit_count = state.num_qubits();
    messages.push(Message {
        dir: Direction::AliceToBob,
        payload: Payload::Qubits {
            labels: (1..=qubit_count).collect(),
        },
    });

    let (outcomes, output) = match (variant, bob_keys) {
        (XotVariant::P1, BobKeys::P1 { k }) => {
            let (branches, k0) = p1_bob_step(&state, y, k)?;
            let picked = branches.sample(&mut rng);
            let outcomes = picked.outcomes.clone();
            let mut bits = outcomes.clone();
            bits.push(k0);
            messages.push(Message {
                dir: Direction::BobToAlice,
                payload: Payload::Bits { bits },
            });
            let output = p1_decode(x, &alice_keys, &pick, &outcomes, k0)?;
            (outcomes, output)
        }
        (XotVariant::P2, BobKeys::P2 { k0, k1 }) => {
            let (branches, k0) = p2_bob_step(&state, y, k0, k1)?;
            let picked = branches.sample(&mut rng);
            let outcomes = picked.outcomes.clone();
            let mut bits = outcomes.clone();
            bits.push(k0);
            messages.push(Message {
                dir: Direction::BobToAlice,
                payload: Payload::Bits { bits },
            });
            let output = p2_decode(x, &alice_keys, &pick, &outcomes, k0)?;
            (outcomes, output)
        }
        (XotVariant::P2b, BobKeys::P2b { k0 }) => {
            let (returned, k0) = p2b_bob_step(&state, y, k0)?;
            messages.push(Message {
                dir: Direction::BobToAlice,
                payload: Payload::Qubits { labels: vec![1, 2] },
            });
            messages.push(Message {
                dir: Direction::BobToAlice,
                payload: Payload::Bits { bits: vec![k0] },
            });
            let (branches, output) = p2b_decode(&returned, x, &alice_keys, &pick, k0)?;
            (branches.branches[0].outcomes.clone(), output)
        }
        _ => unreachable!("keys sampled for the same variant"),
    };

    let expected = (x.0 & y.0) ^ (x.1 & y.1);
    if output != expected {
        return Err(Error::InternalCheck(format!(
            "honest run decoded {output}, expected {expected}"
        )));
    }
    Ok(XotRun {
        variant,
        seed,
        x,
        y,
        alice_keys,
        bob_keys,
        pick,
        outcomes,
        output,
        messages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::DensityOperator;
    use num_complex::Complex64;

    #[test]
    fn p1_encode_places_bell_pair_and_filler() {
        // x=(1,1), s=(0,0,0): bell(0,0) on qubits {1,2}, |+> on qubit 3.
        let keys = AliceKeys::new((1, 1), 0, 0, 0, (1, 1)).unwrap();
        let (state, pick) = p1_encode((1, 1), &keys).unwrap();
        assert_eq!(
            pick,
            PickRecord::BellPair {
                first: 1,
                second: 2
            }
        );
        let expect = bell_state((0, 0)).tensor(&Ket::plus_minus(0)).unwrap();
        assert!((state.fidelity(&expect) - 1.0).abs() < 1e-12);

        // x=(1,0), s=(1,1,1): (|00>-|11>)/sqrt(2) on {1,3}, |-> on qubit 2.
        // Hand-expanded: (|000> - |010> - |101> + |111>)/2.
        let keys = AliceKeys::new((1, 0), 1, 1, 1, (1, 0)).unwrap();
        let (state, pick) = p1_encode((1, 0), &keys).unwrap();
        assert_eq!(
            pick,
            PickRecord::BellPair {
                first: 1,
                second: 3
            }
        );
        let a = state.amplitudes();
        for (idx, want) in [(0, 0.5), (2, -0.5), (5, -0.5), (7, 0.5)] {
            assert!((a[idx] - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn p1_key_average_is_maximally_mixed_for_every_input() {
        for x in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let keys = AliceKeys::enumerate(x);
            let mut avg = DensityOperator::maximally_mixed(3);
            avg.scale(0.0);
            let w = 1.0 / keys.len() as f64;
            for k in &keys {
                let (state, _) = p1_encode(x, k).unwrap();
                avg.scaled_add(w, &DensityOperator::from_ket(&state));
            }
            let mixed = DensityOperator::maximally_mixed(3);
            assert!(crate::qsim::trace_distance(&avg, &mixed).unwrap() < 1e-12);
        }
    }

    #[test]
    fn p1_bob_branch_probabilities_are_complete() {
        let keys = AliceKeys::new((1, 1), 0, 1, 1, (1, 1)).unwrap();
        let (state, _) = p1_encode((1, 1), &keys).unwrap();
        for k in 0..4 {
            let (branches, k0) = p1_bob_step(&state, (1, 0), k).unwrap();
            assert_eq!(k0, k % 2);
            assert!((branches.total_probability() - 1.0).abs() < crate::tol::PROB);
        }
    }

    #[test]
    fn p1_trivial_rotation_yields_parallel_x_outcomes() {
        // With y=(0,0), k=0 on the (s1,s2)=(0,0) encoding nothing is applied;
        // (|01>+|10>)/sqrt(2) equals (|++> - |-->)/sqrt(2), so the picked
        // outcome bits agree (XOR 0) and the decode returns f = 0.
        let keys = AliceKeys::new((1, 1), 0, 0, 0, (1, 1)).unwrap();
        let (state, pick) = p1_encode((1, 1), &keys).unwrap();
        let (branches, k0) = p1_bob_step(&state, (0, 0), 0).unwrap();
        for b in &branches.branches {
            assert_eq!(b.outcomes[0] ^ b.outcomes[1], 0);
            let out = p1_decode((1, 1), &keys, &pick, &b.outcomes, k0).unwrap();
            assert_eq!(out, 0);
        }
    }

    #[test]
    fn p1_intermediate_state_gathers_the_key_phase() {
        // x=(1,1), s=(0,0,0), y=(1,0), k=2: the Bell pair becomes
        // -(|01>-|10>)/sqrt(2) and the filler qubit becomes |->.
        let keys = AliceKeys::new((1, 1), 0, 0, 0, (1, 1)).unwrap();
        let (state, _) = p1_encode((1, 1), &keys).unwrap();
        let mut s = state;
        s.apply_mut(&gate(Gate::Z, &[0])).unwrap();
        let pi = std::f64::consts::PI;
        for q in 0..3 {
            s.apply_mut(&gate(Gate::Rz(pi), &[q])).unwrap();
        }
        let expect = bell_state((0, 1)).tensor(&Ket::plus_minus(1)).unwrap();
        assert!((s.fidelity(&expect) - 1.0).abs() < 1e-12);
        // Overall sign is -1 relative to bell(0,1) (x) |->:
        // amplitude of |010> is -(1/sqrt(2)) * (1/sqrt(2)) = -1/2.
        assert!((s.amplitudes()[0b010].re + 0.5).abs() < 1e-12);
    }

    #[test]
    fn p1_decode_formula_cases() {
        let keys = AliceKeys::new((1, 1), 0, 0, 0, (1, 1)).unwrap();
        let pick = PickRecord::BellPair {
            first: 1,
            second: 2,
        };
        assert_eq!(p1_decode((1, 1), &keys, &pick, &[0, 1, 0], 0).unwrap(), 1);

        let keys = AliceKeys::new((1, 1), 1, 1, 0, (1, 1)).unwrap();
        assert_eq!(p1_decode((1, 1), &keys, &pick, &[0, 0, 1], 1).unwrap(), 0);

        // Zero input decodes to 0 regardless.
        let keys = AliceKeys::new((0, 0), 1, 0, 1, (1, 1)).unwrap();
        assert_eq!(p1_decode((0, 0), &keys, &pick, &[1, 1, 0], 1).unwrap(), 0);
    }

    #[test]
    fn p2_encode_matches_the_table() {
        let keys = AliceKeys::new((1, 1), 0, 0, 0, (1, 1)).unwrap();
        let (state, pick) = p2_encode((1, 1), &keys).unwrap();
        assert_eq!(pick, PickRecord::BasisPair { a: 1, b: 2 });
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((state.amplitudes()[1].re - r).abs() < 1e-12);
        assert!((state.amplitudes()[2].re - r).abs() < 1e-12);

        let keys = AliceKeys::new((1, 0), 1, 1, 0, (1, 0)).unwrap();
        let (state, pick) = p2_encode((1, 0), &keys).unwrap();
        assert_eq!(pick, PickRecord::BasisPair { a: 0, b: 2 });
        assert!((state.amplitudes()[0].re - r).abs() < 1e-12);
        assert!((state.amplitudes()[2].re + r).abs() < 1e-12);
    }

    #[test]
    fn p2_key_average_is_maximally_mixed() {
        for x in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let keys = AliceKeys::enumerate(x);
            let mut avg = DensityOperator::maximally_mixed(2);
            avg.scale(0.0);
            let w = 1.0 / keys.len() as f64;
            for k in &keys {
                let (state, _) = p2_encode(x, k).unwrap();
                avg.scaled_add(w, &DensityOperator::from_ket(&state));
            }
            let mixed = DensityOperator::maximally_mixed(2);
            assert!(crate::qsim::trace_distance(&avg, &mixed).unwrap() < 1e-12);
        }
    }

    #[test]
    fn p2_branches_decode_correctly_and_flip_is_a_complement() {
        let keys = AliceKeys::new((1, 1), 0, 0, 0, (1, 1)).unwrap();
        let (state, pick) = p2_encode((1, 1), &keys).unwrap();
        let (branches, k0) = p2_bob_step(&state, (0, 0), 0, 0).unwrap();
        assert!(branches.branches.len() <= 8);
        assert!((branches.total_probability() - 1.0).abs() < crate::tol::PROB);
        for b in &branches.branches {
            let out = p2_decode((1, 1), &keys, &pick, &b.outcomes, k0).unwrap();
            assert_eq!(out, 0);
        }

        let (flipped, _) = p2_bob_step(&state, (0, 0), 0, 1).unwrap();
        for (a, b) in branches.branches.iter().zip(&flipped.branches) {
            let complement: Vec<u8> = a.outcomes.iter().map(|x| x ^ 1).collect();
            assert_eq!(b.outcomes, complement);
        }
    }

    #[test]
    fn p2b_bob_phase_acts_on_basis_state_zero_only() {
        let keys = AliceKeys::new((1, 1), 1, 0, 0, (1, 1)).unwrap();
        let (state, _) = p2_encode((1, 1), &keys).unwrap(); // (|0>+|3>)/sqrt(2)
        let (after, _) = p2b_bob_step(&state, (0, 0), 1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((after.amplitudes()[0].re + r).abs() < 1e-12);
        assert!((after.amplitudes()[3].re - r).abs() < 1e-12);

        // y=(0,0), k0=0 leaves the state untouched.
        let (same, _) = p2b_bob_step(&state, (0, 0), 0).unwrap();
        assert!((state.fidelity(&same) - 1.0).abs() < 1e-12);

        // y=(1,1) on (|1>+|2>)/sqrt(2) is a global sign.
        let keys = AliceKeys::new((1, 1), 0, 0, 0, (1, 1)).unwrap();
        let (state, _) = p2_encode((1, 1), &keys).unwrap();
        let (after, _) = p2b_bob_step(&state, (1, 1), 0).unwrap();
        assert!((after.amplitudes()[1].re + r).abs() < 1e-12);
        assert!((after.amplitudes()[2].re + r).abs() < 1e-12);
    }

    #[test]
    fn p2b_measure_flags_out_of_subspace_states() {
        let keys = AliceKeys::new((1, 1), 0, 0, 0, (1, 1)).unwrap();
        let (_, pick) = p2_encode((1, 1), &keys).unwrap();
        // |0> has no support on span{|1>,|2>}.
        let outside = Ket::computational(2, 0).unwrap();
        assert!(matches!(
            p2b_measure(&outside, &keys, &pick),
            Err(Error::OutsideSubspace(_))
        ));
    }

    #[test]
    fn run_xot_produces_correct_outputs_and_transcripts() {
        let run = run_xot(XotVariant::P1, (1, 0), (1, 1), 7).unwrap();
        assert_eq!(run.output, 1);
        assert!(matches!(
            run.messages[0].payload,
            Payload::Qubits { ref labels } if labels == &vec![1, 2, 3]
        ));

        let run = run_xot(XotVariant::P2b, (1, 1), (1, 1), 11).unwrap();
        assert_eq!(run.output, 0);

        // Transcript JSON round-trips through the documented shape.
        let v = run.to_json();
        assert_eq!(v["variant"], "p2b");
        assert!(v["messages"].as_array().unwrap().len() >= 2);
    }

    #[test]
    fn sampled_runs_are_always_correct() {
        for variant in [XotVariant::P1, XotVariant::P2, XotVariant::P2b] {
            for seed in 0..200u64 {
                let x = (((seed >> 1) & 1) as u8, ((seed >> 2) & 1) as u8);
                let y = (((seed >> 3) & 1) as u8, ((seed >> 4) & 1) as u8);
                let run = run_xot(variant, x, y, seed).unwrap();
                assert_eq!(run.output, (x.0 & y.0) ^ (x.1 & y.1));
            }
        }
    }
}
