//! Linear polynomial evaluation modulo 2: `f = <x, y> mod 2` over bit
//! vectors of length `2n`, built from `n` modified XOT subprocedure
//! instances.
//!
//! Modifications relative to the standalone XOT variants: Bob never
//! discloses `k0`, his `k0` is shared across all instances, and Alice's key
//! sampling enforces that the number of instances with `s1 = 1` among the
//! instances whose input pair is non-zero is even. The even parity makes
//! the hidden `sum s1*k0` term vanish from her decode, so correctness holds
//! without ever seeing `k0`.
//!
//! The module also contains the classical XOR-homomorphic-encryption hybrid
//! (Bob ships encrypted outcome bits, Alice folds her picks into a single
//! masked ciphertext) and decoy padding for classical post-processing.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::he::XorHomomorphic;
use crate::qsim::{BranchSet, Ket};
use crate::xot::{
    p1_bob_step, p1_encode, p2_bob_step, p2_encode, p2b_bob_step, p2b_measure, pick_labels,
    AliceKeys, Direction, Message, Payload, PickRecord, XotVariant,
};
use crate::{Error, Result};

/// Alice's side of one subprocedure instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceAlice {
    pub keys: AliceKeys,
    pub pick: PickRecord,
}

/// Alice's full preparation state for a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct P3AliceState {
    pub variant: XotVariant,
    pub instances: Vec<InstanceAlice>,
    /// Sum of `s1` over non-zero-input instances, mod 2. Always 0 by
    /// construction.
    pub parity_certificate: u8,
}

/// Bob's keys for a run: one shared `k0`, one `k1` per instance (unused by
/// the echo variant).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct P3BobState {
    pub k0: u8,
    pub k1: Vec<u8>,
}

impl P3BobState {
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            k0: rng.gen_range(0..2),
            k1: (0..n).map(|_| rng.gen_range(0..2)).collect(),
        }
    }

    pub fn enumerate(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for k0 in 0..2u8 {
            for combo in 0..(1u32 << n) {
                out.push(Self {
                    k0,
                    k1: (0..n).map(|i| ((combo >> i) & 1) as u8).collect(),
                });
            }
        }
        out
    }
}

/// Splits a `2n`-bit vector into its instance input pairs.
pub fn input_pairs(x: &[u8]) -> Result<Vec<(u8, u8)>> {
    if x.is_empty() || !x.len().is_multiple_of(2) {
        return Err(Error::LengthMismatch {
            expected: x.len() + 1,
            got: x.len(),
        });
    }
    for &b in x {
        if b > 1 {
            return Err(Error::InvalidBit(b));
        }
    }
    Ok(x.chunks(2).map(|c| (c[0], c[1])).collect())
}

/// `<x, y> mod 2`; the plaintext shadow every run is checked against.
pub fn inner_product(x: &[u8], y: &[u8]) -> u8 {
    x.iter().zip(y).fold(0, |acc, (a, b)| acc ^ (a & b))
}

/// Step 1: samples per-instance keys subject to the even-parity constraint
/// and encodes each instance with the chosen subprocedure variant.
///
/// The constraint is sampled by drawing every `s1` freely and overwriting
/// the last non-zero instance's `s1` to fix the parity; by symmetry this is
/// uniform over the constrained set. All-zero inputs have no constrained
/// instance and the parity condition is vacuous.
pub fn p3_prepare<R: Rng + ?Sized>(
    x: &[u8],
    variant: XotVariant,
    rng: &mut R,
) -> Result<(P3AliceState, Vec<Ket>)> {
    let pairs = input_pairs(x)?;
    let mut keys: Vec<AliceKeys> = pairs.iter().map(|&p| AliceKeys::sample(p, rng)).collect();
    let nonzero: Vec<usize> = (0..pairs.len()).filter(|&i| pairs[i] != (0, 0)).collect();
    if let Some((&last, rest)) = nonzero.split_last() {
        let parity = rest.iter().fold(0u8, |acc, &i| acc ^ keys[i].s1);
        keys[last].s1 = parity;
    }
    build_alice_state(&pairs, keys, variant)
}

/// Deterministic assembly used by both the sampler and the exhaustive
/// enumerators.
pub fn build_alice_state(
    pairs: &[(u8, u8)],
    keys: Vec<AliceKeys>,
    variant: XotVariant,
) -> Result<(P3AliceState, Vec<Ket>)> {
    if keys.len() != pairs.len() {
        return Err(Error::LengthMismatch {
            expected: pairs.len(),
            got: keys.len(),
        });
    }
    let mut instances = Vec::with_capacity(pairs.len());
    let mut states = Vec::with_capacity(pairs.len());
    let mut parity = 0u8;
    for (&pair, key) in pairs.iter().zip(&keys) {
        let (state, pick) = match variant {
            XotVariant::P1 => p1_encode(pair, key)?,
            XotVariant::P2 | XotVariant::P2b => p2_encode(pair, key)?,
        };
        if pair != (0, 0) {
            parity ^= key.s1;
        }
        instances.push(InstanceAlice { keys: *key, pick });
        states.push(state);
    }
    if parity != 0 {
        return Err(Error::InvalidKeys(
            "s1 parity over non-zero instances is odd".into(),
        ));
    }
    Ok((
        P3AliceState {
            variant,
            instances,
            parity_certificate: parity,
        },
        states,
    ))
}

/// Every parity-consistent key vector for the given inputs, including all
/// zero-input substitutions. Used by exhaustive tests and ensemble
/// construction.
pub fn enumerate_constrained_keys(pairs: &[(u8, u8)]) -> Vec<Vec<AliceKeys>> {
    let per_instance: Vec<Vec<AliceKeys>> =
        pairs.iter().map(|&p| AliceKeys::enumerate(p)).collect();
    let mut out = Vec::new();
    let mut cursor = vec![0usize; pairs.len()];
    'outer: loop {
        let combo: Vec<AliceKeys> = cursor
            .iter()
            .enumerate()
            .map(|(i, &c)| per_instance[i][c])
            .collect();
        let parity = combo
            .iter()
            .zip(pairs)
            .filter(|(_, &p)| p != (0, 0))
            .fold(0u8, |acc, (k, _)| acc ^ k.s1);
        if parity == 0 {
            out.push(combo);
        }
        for i in 0..cursor.len() {
            cursor[i] += 1;
            if cursor[i] < per_instance[i].len() {
                continue 'outer;
            }
            cursor[i] = 0;
        }
        break;
    }
    out
}

/// Bob's reply: measurement outcome bits (P1/P2 subprocedures) or the
/// echoed qubits (P2b).
#[derive(Clone, Debug)]
pub enum BobResponse {
    Outcomes(Vec<u8>),
    Qubits(Vec<Ket>),
}

/// Per-instance branch enumeration of Bob's step, for exhaustive checks.
/// `k0` is shared; `k1` indexes the instance key.
pub fn p3_bob_instance_branches(
    state: &Ket,
    y_pair: (u8, u8),
    variant: XotVariant,
    k0: u8,
    k1: u8,
) -> Result<BranchSet> {
    match variant {
        XotVariant::P1 => {
            let k = 2 * (k1 & 1) + (k0 & 1);
            Ok(p1_bob_step(state, y_pair, k)?.0)
        }
        XotVariant::P2 => Ok(p2_bob_step(state, y_pair, k0, k1)?.0),
        XotVariant::P2b => Err(Error::UnsupportedVariant {
            variant: "p2b".into(),
            operation: "branch enumeration of a measuring Bob".into(),
        }),
    }
}

/// Step 2: Bob applies his gates instance by instance and measures (P1/P2)
/// or echoes the qubits (P2b). `k0` is never part of any message.
pub fn p3_bob<R: Rng + ?Sized>(
    states: &[Ket],
    y: &[u8],
    variant: XotVariant,
    rng: &mut R,
) -> Result<(P3BobState, BobResponse)> {
    let pairs = input_pairs(y)?;
    if pairs.len() != states.len() {
        return Err(Error::LengthMismatch {
            expected: states.len() * 2,
            got: y.len(),
        });
    }
    let bob = P3BobState::sample(states.len(), rng);
    match variant {
        XotVariant::P1 | XotVariant::P2 => {
            let mut outcomes = Vec::with_capacity(3 * states.len());
            for (i, state) in states.iter().enumerate() {
                let branches =
                    p3_bob_instance_branches(state, pairs[i], variant, bob.k0, bob.k1[i])?;
                outcomes.extend(branches.sample(rng).outcomes.clone());
            }
            Ok((bob, BobResponse::Outcomes(outcomes)))
        }
        XotVariant::P2b => {
            let mut returned = Vec::with_capacity(states.len());
            for (i, state) in states.iter().enumerate() {
                let (echoed, _) = p2b_bob_step(state, pairs[i], bob.k0)?;
                returned.push(echoed);
            }
            Ok((bob, BobResponse::Qubits(returned)))
        }
    }
}

/// Decoded totals: `output = r0_total XOR s2_total`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct P3Decode {
    pub r0_total: u8,
    pub s2_total: u8,
    pub output: u8,
}

/// Step 3 for measuring subprocedures: per-instance `r0` is 0 for zero
/// input pairs and the XOR of the two picked outcome bits otherwise;
/// `S2` accumulates `s2` over non-zero instances only. No `k0` term
/// appears: the parity certificate cancels it.
pub fn p3_decode(x: &[u8], alice: &P3AliceState, outcomes: &[u8]) -> Result<P3Decode> {
    let pairs = input_pairs(x)?;
    if pairs.len() != alice.instances.len() {
        return Err(Error::LengthMismatch {
            expected: alice.instances.len() * 2,
            got: x.len(),
        });
    }
    if outcomes.len() != 3 * pairs.len() {
        return Err(Error::LengthMismatch {
            expected: 3 * pairs.len(),
            got: outcomes.len(),
        });
    }
    let mut r0_total = 0u8;
    let mut s2_total = 0u8;
    for (i, &pair) in pairs.iter().enumerate() {
        if pair == (0, 0) {
            continue;
        }
        let inst = &alice.instances[i];
        let (first, second) = pick_labels(inst.keys.effective_x)?;
        let chunk = &outcomes[3 * i..3 * i + 3];
        r0_total ^= chunk[first - 1] ^ chunk[second - 1];
        s2_total ^= inst.keys.s2;
    }
    Ok(P3Decode {
        r0_total,
        s2_total,
        output: r0_total ^ s2_total,
    })
}

/// Step 3 for the echo subprocedure: Alice measures each returned instance
/// herself; each non-zero instance contributes its measured `r` (which
/// already folds in `s2`). Returns the per-instance bits alongside the
/// totals.
pub fn p3_decode_returned(
    x: &[u8],
    alice: &P3AliceState,
    returned: &[Ket],
) -> Result<(Vec<u8>, P3Decode)> {
    let pairs = input_pairs(x)?;
    if returned.len() != pairs.len() {
        return Err(Error::LengthMismatch {
            expected: pairs.len(),
            got: returned.len(),
        });
    }
    let mut bits = Vec::with_capacity(pairs.len());
    let mut r_total = 0u8;
    for (i, &pair) in pairs.iter().enumerate() {
        let inst = &alice.instances[i];
        let branches = p2b_measure(&returned[i], &inst.keys, &inst.pick)?;
        if branches.branches.len() != 1 {
            return Err(Error::InternalCheck(
                "honest echoed instance measured ambiguously".into(),
            ));
        }
        let r = branches.branches[0].outcomes[0];
        bits.push(r);
        if pair != (0, 0) {
            r_total ^= r;
        }
    }
    Ok((
        bits,
        P3Decode {
            r0_total: r_total,
            s2_total: 0,
            output: r_total,
        },
    ))
}

/// A complete linear-evaluation run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct P3Run {
    pub subprocedure: XotVariant,
    pub seed: u64,
    pub n: usize,
    pub x: Vec<u8>,
    pub y: Vec<u8>,
    pub alice: P3AliceState,
    pub bob: P3BobState,
    /// Outcome bits Bob reported (3n for P1/P2) or Alice's measured bits
    /// (n for P2b).
    pub outcomes: Vec<u8>,
    pub parity_certificate: u8,
    pub r0_total: u8,
    pub s2_total: u8,
    pub output: u8,
    pub he_used: bool,
    pub messages: Vec<Message>,
}

impl P3Run {
    /// Run record in the documented JSON shape (sorted keys).
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "variant": "p3",
            "subprocedure": self.subprocedure,
            "seed": self.seed,
            "n": self.n,
            "alice": { "x": self.x, "keys": self.alice.instances },
            "bob": { "y": self.y, "keys": { "k0": self.bob.k0, "k1": self.bob.k1 } },
            "parity_certificate": self.parity_certificate,
            "R0": self.r0_total,
            "S2": self.s2_total,
            "he_used": self.he_used,
            "messages": self.messages,
            "output": self.output,
        })
    }
}

fn qubit_labels(count: usize) -> Vec<usize> {
    (1..=count).collect()
}

/// End-to-end sampled run with transcript. The transcript never contains a
/// `k0` message.
pub fn run_p3(x: &[u8], y: &[u8], variant: XotVariant, seed: u64) -> Result<P3Run> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (alice, states) = p3_prepare(x, variant, &mut rng)?;
    let n = states.len();
    let per_instance_qubits = states[0].num_qubits();
    let mut messages = vec![Message {
        dir: Direction::AliceToBob,
        payload: Payload::Qubits {
            labels: qubit_labels(per_instance_qubits * n),
        },
    }];

    let (bob, response) = p3_bob(&states, y, variant, &mut rng)?;
    let (outcomes, decode) = match response {
        BobResponse::Outcomes(outcomes) => {
            messages.push(Message {
                dir: Direction::BobToAlice,
                payload: Payload::Bits {
                    bits: outcomes.clone(),
                },
            });
            let decode = p3_decode(x, &alice, &outcomes)?;
            (outcomes, decode)
        }
        BobResponse::Qubits(returned) => {
            messages.push(Message {
                dir: Direction::BobToAlice,
                payload: Payload::Qubits {
                    labels: qubit_labels(per_instance_qubits * n),
                },
            });
            let (bits, decode) = p3_decode_returned(x, &alice, &returned)?;
            (bits, decode)
        }
    };

    let expected = inner_product(x, y);
    if decode.output != expected {
        return Err(Error::InternalCheck(format!(
            "honest linear evaluation decoded {}, expected {expected}",
            decode.output
        )));
    }
    Ok(P3Run {
        subprocedure: variant,
        seed,
        n,
        x: x.to_vec(),
        y: y.to_vec(),
        parity_certificate: alice.parity_certificate,
        alice,
        bob,
        outcomes,
        r0_total: decode.r0_total,
        s2_total: decode.s2_total,
        output: decode.output,
        he_used: false,
        messages,
    })
}

/// Honest-but-curious audit of the encrypted exchange.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeAudit {
    /// Plaintext bits Bob sees during the exchange. Exactly one entry: the
    /// masked XOR of Alice's picked outcome bits.
    pub bob_plaintext_view: Vec<u8>,
    /// Alice's uniformly random mask bit.
    pub alice_mask: u8,
    /// Number of ciphertexts Bob shipped to Alice.
    pub ciphertexts_sent: usize,
}

/// The hybrid run: the quantum phase is unchanged, but Bob sends his
/// outcome bits encrypted; Alice folds the bits she would have picked into
/// one ciphertext, adds an encrypted mask bit of her choice, and returns it
/// for decryption. One joint encryption round serves all instances, so Bob
/// only ever sees the single masked bit.
///
/// Works with any [`XorHomomorphic`] scheme; the built-in instantiation is
/// [`crate::he::HeKeyPair`]. The echo subprocedure has no outcome bits to encrypt and
/// is rejected.
pub fn run_p3_he<S: XorHomomorphic>(
    x: &[u8],
    y: &[u8],
    variant: XotVariant,
    he_keys: &S,
    seed: u64,
) -> Result<(P3Run, HeAudit)> {
    if variant == XotVariant::P2b {
        return Err(Error::UnsupportedVariant {
            variant: "p2b".into(),
            operation: "homomorphic-encryption hybrid".into(),
        });
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (alice, states) = p3_prepare(x, variant, &mut rng)?;
    let n = states.len();
    let per_instance_qubits = states[0].num_qubits();
    let mut messages = vec![Message {
        dir: Direction::AliceToBob,
        payload: Payload::Qubits {
            labels: qubit_labels(per_instance_qubits * n),
        },
    }];

    let (bob, response) = p3_bob(&states, y, variant, &mut rng)?;
    let outcomes = match response {
        BobResponse::Outcomes(o) => o,
        BobResponse::Qubits(_) => unreachable!("P2b was rejected above"),
    };

    // Bob encrypts every outcome bit under his own key pair.
    let ciphertexts: Vec<S::Ciphertext> = outcomes
        .iter()
        .map(|&bit| he_keys.encrypt(bit, &mut rng))
        .collect();
    messages.push(Message {
        dir: Direction::BobToAlice,
        payload: Payload::Ciphertexts {
            count: ciphertexts.len(),
        },
    });

    // Alice folds the positions she would have picked, plus her mask.
    let pairs = input_pairs(x)?;
    let mask: u8 = rng.gen_range(0..2);
    let mut acc = he_keys.encrypt(mask, &mut rng);
    for (i, &pair) in pairs.iter().enumerate() {
        if pair == (0, 0) {
            continue;
        }
        let (first, second) = pick_labels(alice.instances[i].keys.effective_x)?;
        for label in [first, second] {
            acc = he_keys.xor(&acc, &ciphertexts[3 * i + (label - 1)])?;
        }
    }
    messages.push(Message {
        dir: Direction::AliceToBob,
        payload: Payload::Ciphertexts { count: 1 },
    });

    // Bob decrypts the single masked bit and returns it in the clear.
    let masked = he_keys.decrypt(&acc)?;
    messages.push(Message {
        dir: Direction::BobToAlice,
        payload: Payload::Bits { bits: vec![masked] },
    });

    let r0_total = masked ^ mask;
    let shadow = p3_decode(x, &alice, &outcomes)?;
    if r0_total != shadow.r0_total {
        return Err(Error::InternalCheck(format!(
            "homomorphic fold produced {r0_total}, plaintext shadow {}",
            shadow.r0_total
        )));
    }
    let output = r0_total ^ shadow.s2_total;
    let expected = inner_product(x, y);
    if output != expected {
        return Err(Error::InternalCheck(format!(
            "hybrid run decoded {output}, expected {expected}"
        )));
    }

    let audit = HeAudit {
        bob_plaintext_view: vec![masked],
        alice_mask: mask,
        ciphertexts_sent: ciphertexts.len(),
    };
    Ok((
        P3Run {
            subprocedure: variant,
            seed,
            n,
            x: x.to_vec(),
            y: y.to_vec(),
            parity_certificate: alice.parity_certificate,
            alice,
            bob,
            outcomes,
            r0_total,
            s2_total: shadow.s2_total,
            output,
            he_used: true,
            messages,
        },
        audit,
    ))
}

/// Where the real inputs live inside a decoy-padded vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoyPlacement {
    FirstHalf,
    LastHalf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoyMap {
    pub placement: DecoyPlacement,
    pub real_len: usize,
}

impl DecoyMap {
    pub fn real_range(&self) -> std::ops::Range<usize> {
        match self.placement {
            DecoyPlacement::FirstHalf => 0..self.real_len,
            DecoyPlacement::LastHalf => self.real_len..2 * self.real_len,
        }
    }

    pub fn decoy_range(&self) -> std::ops::Range<usize> {
        match self.placement {
            DecoyPlacement::FirstHalf => self.real_len..2 * self.real_len,
            DecoyPlacement::LastHalf => 0..self.real_len,
        }
    }
}

/// Doubles the input vector: the real bits land in the first or last half
/// (coin flip) and the other half is uniformly random. The caller must zero
/// Bob-side coefficients at the decoy positions so the polynomial value is
/// unchanged.
pub fn pad_with_decoys<R: Rng + ?Sized>(x: &[u8], rng: &mut R) -> (Vec<u8>, DecoyMap) {
    let placement = if rng.gen::<bool>() {
        DecoyPlacement::FirstHalf
    } else {
        DecoyPlacement::LastHalf
    };
    let decoys: Vec<u8> = (0..x.len()).map(|_| rng.gen_range(0..2)).collect();
    let padded = match placement {
        DecoyPlacement::FirstHalf => x.iter().chain(&decoys).copied().collect(),
        DecoyPlacement::LastHalf => decoys.iter().chain(x).copied().collect(),
    };
    (
        padded,
        DecoyMap {
            placement,
            real_len: x.len(),
        },
    )
}

/// Zeroes the coefficients at decoy positions of a padded partner vector.
pub fn zero_decoy_coefficients(y_padded: &mut [u8], map: &DecoyMap) {
    for i in map.decoy_range() {
        y_padded[i] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::he::he_keygen;

    #[test]
    fn single_nonzero_instance_forces_s1_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let (alice, _) = p3_prepare(&[1, 1], XotVariant::P1, &mut rng).unwrap();
            assert_eq!(alice.instances[0].keys.s1, 0);
            assert_eq!(alice.parity_certificate, 0);
        }
    }

    #[test]
    fn two_nonzero_instances_have_matching_s1() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            let (alice, _) = p3_prepare(&[1, 0, 0, 1], XotVariant::P1, &mut rng).unwrap();
            let s = (alice.instances[0].keys.s1, alice.instances[1].keys.s1);
            assert!(s == (0, 0) || s == (1, 1));
            seen.insert(s);
        }
        assert_eq!(seen.len(), 2, "both parity classes should occur");
    }

    #[test]
    fn all_zero_input_is_unconstrained_and_decodes_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (alice, states) = p3_prepare(&[0, 0, 0, 0], XotVariant::P1, &mut rng).unwrap();
        assert_eq!(alice.parity_certificate, 0);
        let (_, response) = p3_bob(&states, &[1, 1, 1, 1], XotVariant::P1, &mut rng).unwrap();
        let outcomes = match response {
            BobResponse::Outcomes(o) => o,
            _ => unreachable!(),
        };
        let decode = p3_decode(&[0, 0, 0, 0], &alice, &outcomes).unwrap();
        assert_eq!(decode.output, 0);
    }

    #[test]
    fn sampled_runs_match_the_inner_product_for_every_variant() {
        for variant in [XotVariant::P1, XotVariant::P2, XotVariant::P2b] {
            for seed in 0..300u64 {
                let bits = seed as usize;
                let x: Vec<u8> = (0..4).map(|i| ((bits >> i) & 1) as u8).collect();
                let y: Vec<u8> = (0..4).map(|i| ((bits >> (i + 4)) & 1) as u8).collect();
                let run = run_p3(&x, &y, variant, seed).unwrap();
                assert_eq!(run.output, inner_product(&x, &y));
                assert_eq!(run.parity_certificate, 0);
            }
        }
    }

    #[test]
    fn transcript_contains_no_k0_message() {
        let run = run_p3(&[1, 0, 1, 1], &[1, 1, 0, 1], XotVariant::P1, 9).unwrap();
        // Bob's only classical message is the 3n outcome bits.
        let bob_msgs: Vec<&Message> = run
            .messages
            .iter()
            .filter(|m| m.dir == Direction::BobToAlice)
            .collect();
        assert_eq!(bob_msgs.len(), 1);
        match &bob_msgs[0].payload {
            Payload::Bits { bits } => assert_eq!(bits.len(), 6),
            other => panic!("unexpected payload {other:?}"),
        }
        let v = run.to_json();
        assert_eq!(v["R0"], serde_json::json!(run.r0_total));
        assert!(v.get("k0").is_none());

        // Same for the echo subprocedure: qubits travel back, no bits.
        let run = run_p3(&[1, 0, 1, 1], &[1, 1, 0, 1], XotVariant::P2b, 9).unwrap();
        assert!(run
            .messages
            .iter()
            .filter(|m| m.dir == Direction::BobToAlice)
            .all(|m| matches!(m.payload, Payload::Qubits { .. })));
    }

    #[test]
    fn hybrid_run_matches_plain_run_and_leaks_one_masked_bit() {
        let mut krng = ChaCha8Rng::seed_from_u64(42);
        let kp = he_keygen(16, &mut krng).unwrap();
        for seed in 0..20u64 {
            let x = [1, 0, 1, 1];
            let y = [0, 1, 1, 1];
            let plain = run_p3(&x, &y, XotVariant::P1, seed).unwrap();
            let (hybrid, audit) = run_p3_he(&x, &y, XotVariant::P1, &kp, seed).unwrap();
            assert_eq!(plain.output, hybrid.output);
            assert!(hybrid.he_used);
            assert_eq!(audit.bob_plaintext_view.len(), 1);
            assert_eq!(
                audit.bob_plaintext_view[0],
                hybrid.r0_total ^ audit.alice_mask
            );
            assert_eq!(audit.ciphertexts_sent, 6);
        }
    }

    #[test]
    fn hybrid_rejects_the_echo_variant() {
        let mut krng = ChaCha8Rng::seed_from_u64(43);
        let kp = he_keygen(12, &mut krng).unwrap();
        assert!(matches!(
            run_p3_he(&[1, 1], &[1, 0], XotVariant::P2b, &kp, 1),
            Err(Error::UnsupportedVariant { .. })
        ));
    }

    /// A stand-in scheme (one-time-pad bit with a stored pad) exercising
    /// the pluggable encryption interface end to end.
    struct PadScheme;

    impl XorHomomorphic for PadScheme {
        type Ciphertext = (u8, u8); // (masked bit, pad)

        fn encrypt<R: rand::Rng + ?Sized>(&self, m: u8, rng: &mut R) -> (u8, u8) {
            let pad = rng.gen_range(0..2u8);
            (m ^ pad, pad)
        }
        fn xor(&self, a: &(u8, u8), b: &(u8, u8)) -> crate::Result<(u8, u8)> {
            Ok((a.0 ^ b.0, a.1 ^ b.1))
        }
        fn decrypt(&self, c: &(u8, u8)) -> crate::Result<u8> {
            Ok(c.0 ^ c.1)
        }
    }

    #[test]
    fn hybrid_accepts_an_external_scheme() {
        for seed in 0..10u64 {
            let x = [1, 0, 1, 1];
            let y = [1, 1, 0, 1];
            let (run, audit) = run_p3_he(&x, &y, XotVariant::P2, &PadScheme, seed).unwrap();
            assert_eq!(run.output, inner_product(&x, &y));
            assert_eq!(audit.bob_plaintext_view.len(), 1);
        }
    }

    #[test]
    fn decoy_padding_preserves_the_polynomial_with_zeroed_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x: Vec<u8> = (0..4).map(|_| rng.gen_range(0..2)).collect();
            let y: Vec<u8> = (0..4).map(|_| rng.gen_range(0..2)).collect();
            let (padded, map) = pad_with_decoys(&x, &mut rng);
            assert_eq!(padded.len(), 8);
            assert_eq!(&padded[map.real_range()], &x[..]);

            let mut y_padded = vec![0u8; 8];
            let real = map.real_range();
            y_padded[real.clone()].copy_from_slice(&y);
            // Fill decoy coefficients with junk, then zero them.
            for i in map.decoy_range() {
                y_padded[i] = rng.gen_range(0..2);
            }
            zero_decoy_coefficients(&mut y_padded, &map);
            assert_eq!(inner_product(&padded, &y_padded), inner_product(&x, &y));
        }
    }

    #[test]
    fn decoy_bits_cover_the_full_range_across_seeds() {
        let mut counts = std::collections::HashMap::new();
        for seed in 0..2000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (padded, map) = pad_with_decoys(&[1, 0], &mut rng);
            let decoys: Vec<u8> = padded[map.decoy_range()].to_vec();
            *counts.entry(decoys).or_insert(0usize) += 1;
        }
        // All 4 decoy patterns occur, each within a few sigma of uniform.
        assert_eq!(counts.len(), 4);
        for (_, c) in counts {
            let expect = 2000.0 / 4.0;
            let sigma = (2000.0_f64 * 0.25 * 0.75).sqrt();
            assert!((c as f64 - expect).abs() < 3.5 * sigma);
        }
    }
}
