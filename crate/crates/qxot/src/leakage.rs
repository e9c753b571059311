//! View ensembles held by each party and the leakage quantities computed
//! from them.
//!
//! Bob's view of a linear-evaluation run is the density operator of the
//! received qubits averaged over Alice's parity-constrained keys; Alice's
//! view of Bob's input is her (possibly quantum) key registers together
//! with the classical outcome bits, averaged over Bob's hidden keys.
//! Accessible information is never optimized globally: reports carry the
//! Holevo upper bound plus the named measurement strategies.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qsim::{
    holevo_information, measure_branches, shannon_entropy, von_neumann_entropy, Basis,
    DensityOperator, EnsembleEntry, Gate, GateSpec, Ket, StateEnsemble,
};
use crate::xot::{p1_encode, AliceKeys, XotVariant};
use crate::{Error, Result};

/// Largest `n` for which dense `3n`-qubit ensembles are constructed.
pub const DENSE_N_CAP: usize = 3;

/// Distribution over Alice's `2n`-bit input vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prior {
    /// All `4^n` vectors equally likely.
    Uniform,
    /// The instance pairs are all equal: four vectors, equally likely.
    AllPairsEqual,
    /// A single fixed vector.
    Point(Vec<u8>),
}

impl Prior {
    /// Expands to explicit `(x, weight)` entries over `2n`-bit vectors.
    pub fn weights(&self, n: usize) -> Result<Vec<(Vec<u8>, f64)>> {
        match self {
            Prior::Uniform => {
                let count = 1usize << (2 * n);
                Ok((0..count)
                    .map(|v| (bits_of(v, 2 * n), 1.0 / count as f64))
                    .collect())
            }
            Prior::AllPairsEqual => Ok((0..4usize)
                .map(|pair| {
                    let bits: Vec<u8> = (0..n)
                        .flat_map(|_| [(pair >> 1) as u8, (pair & 1) as u8])
                        .collect();
                    (bits, 0.25)
                })
                .collect()),
            Prior::Point(x) => {
                if x.len() != 2 * n {
                    return Err(Error::LengthMismatch {
                        expected: 2 * n,
                        got: x.len(),
                    });
                }
                Ok(vec![(x.clone(), 1.0)])
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Prior::Uniform => "uniform".into(),
            Prior::AllPairsEqual => "all_pairs_equal".into(),
            Prior::Point(x) => format!(
                "point:{}",
                x.iter().map(|b| b.to_string()).collect::<String>()
            ),
        }
    }
}

fn bits_of(value: usize, len: usize) -> Vec<u8> {
    (0..len).map(|i| ((value >> (len - 1 - i)) & 1) as u8).collect()
}

/// Whether Bob's view is conditioned on the even parity certificate (the
/// protocol), the odd complement, or averaged over both (a Bob deprived of
/// the parity bit).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityMode {
    Even,
    Odd,
    Blind,
}

/// Unnormalized block-diagonal state: outcome bits -> (probability, block).
type OutcomeBlocks = BTreeMap<Vec<u8>, (f64, DMatrix<Complex64>)>;

/// 8x8 building blocks for one instance: the `(s2, s3)`-averaged encodings
/// at fixed `s1`.
fn instance_blocks(pair: (u8, u8)) -> Result<(DensityOperator, DensityOperator)> {
    let mut by_s1 = Vec::with_capacity(2);
    for s1 in 0..2u8 {
        let mut acc = DMatrix::from_element(8, 8, Complex64::ZERO);
        for s2 in 0..2u8 {
            for s3 in 0..2u8 {
                let keys = AliceKeys::new(pair, s1, s2, s3, pair)?;
                let (state, _) = p1_encode(pair, &keys)?;
                acc += DensityOperator::from_ket(&state).matrix() * Complex64::new(0.25, 0.0);
            }
        }
        by_s1.push(acc);
    }
    let half = Complex64::new(0.5, 0.0);
    let a = (&by_s1[0] + &by_s1[1]) * half;
    let b = (&by_s1[0] - &by_s1[1]) * half;
    Ok((
        DensityOperator::from_matrix_unchecked(3, a),
        DensityOperator::from_matrix_unchecked(3, b),
    ))
}

/// Bob's received state for one input vector, averaged over all keys in the
/// chosen parity class (and over zero-input substitutions).
///
/// The parity-constrained average factorizes: with `A_i` the per-instance
/// average over both `s1` values and `B_i` the half-difference, the even
/// class is `kron(A) + kron(B)` and the odd class `kron(A) - kron(B)`;
/// zero-input instances contribute `I/8` everywhere.
pub fn bob_view_state(x: &[u8], mode: ParityMode) -> Result<DensityOperator> {
    let pairs = crate::linear::input_pairs(x)?;
    let n = pairs.len();
    if n > DENSE_N_CAP {
        return Err(Error::TooLarge {
            n,
            cap: DENSE_N_CAP,
        });
    }
    let mixed = DensityOperator::maximally_mixed(3);
    let mut a_factors = Vec::with_capacity(n);
    let mut b_factors = Vec::with_capacity(n);
    let mut nonzero = 0usize;
    for &pair in &pairs {
        if pair == (0, 0) {
            a_factors.push(mixed.clone());
            b_factors.push(mixed.clone());
        } else {
            let (a, b) = instance_blocks(pair)?;
            a_factors.push(a);
            b_factors.push(b);
            nonzero += 1;
        }
    }
    let kron_all = |fs: &[DensityOperator]| -> Result<DensityOperator> {
        let mut acc = fs[0].clone();
        for f in &fs[1..] {
            acc = acc.kron(f)?;
        }
        Ok(acc)
    };
    let a_term = kron_all(&a_factors)?;
    if nonzero == 0 {
        return Ok(a_term);
    }
    let b_term = kron_all(&b_factors)?;
    let mat = match mode {
        ParityMode::Even => a_term.matrix() + b_term.matrix(),
        ParityMode::Odd => a_term.matrix() - b_term.matrix(),
        ParityMode::Blind => a_term.matrix().clone(),
    };
    Ok(DensityOperator::from_matrix_unchecked(3 * n, mat))
}

/// The `{prior, x, state}` ensemble Bob holds after step 1 of a
/// linear-evaluation run.
pub fn bob_view_ensemble_with_parity(
    n: usize,
    prior: &Prior,
    mode: ParityMode,
) -> Result<StateEnsemble> {
    let entries = prior
        .weights(n)?
        .into_iter()
        .map(|(x, w)| {
            Ok(EnsembleEntry {
                prior: w,
                state: bob_view_state(&x, mode)?,
                label: x,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    StateEnsemble::new(entries)
}

/// The protocol ensemble (even parity certificate).
pub fn bob_view_ensemble(n: usize, prior: &Prior) -> Result<StateEnsemble> {
    bob_view_ensemble_with_parity(n, prior, ParityMode::Even)
}

/// Bob's view of a single standalone XOT instance, for each input pair.
/// Every variant hides Alice's input perfectly, so this ensemble carries no
/// information.
pub fn xot_single_instance_ensemble(variant: XotVariant) -> Result<StateEnsemble> {
    let mut entries = Vec::new();
    for xv in 0..4usize {
        let x = ((xv >> 1) as u8, (xv & 1) as u8);
        let keys = AliceKeys::enumerate(x);
        let w = 1.0 / keys.len() as f64;
        let num_qubits = match variant {
            XotVariant::P1 => 3,
            XotVariant::P2 | XotVariant::P2b => 2,
        };
        let dim = 1 << num_qubits;
        let mut acc = DMatrix::from_element(dim, dim, Complex64::ZERO);
        for k in &keys {
            let state = match variant {
                XotVariant::P1 => p1_encode(x, k)?.0,
                XotVariant::P2 | XotVariant::P2b => crate::xot::p2_encode(x, k)?.0,
            };
            acc += DensityOperator::from_ket(&state).matrix() * Complex64::new(w, 0.0);
        }
        entries.push(EnsembleEntry {
            prior: 0.25,
            label: vec![x.0, x.1],
            state: DensityOperator::from_matrix_unchecked(num_qubits, acc),
        });
    }
    StateEnsemble::new(entries)
}

/// Groups an ensemble by a projection of its labels, mixing the states
/// within each group. Used to marginalize over part of the secret, e.g.
/// keeping only the Z-mask positions of a teleportation input.
pub fn marginalize_ensemble<F>(ensemble: &StateEnsemble, project: F) -> Result<StateEnsemble>
where
    F: Fn(&[u8]) -> Vec<u8>,
{
    let mut groups: BTreeMap<Vec<u8>, (f64, DMatrix<Complex64>)> = BTreeMap::new();
    let dim = ensemble.dim();
    let num_qubits = ensemble.num_qubits();
    for e in &ensemble.entries {
        let key = project(&e.label);
        let slot = groups
            .entry(key)
            .or_insert_with(|| (0.0, DMatrix::from_element(dim, dim, Complex64::ZERO)));
        slot.0 += e.prior;
        slot.1 += e.state.matrix() * Complex64::new(e.prior, 0.0);
    }
    let entries = groups
        .into_iter()
        .map(|(label, (p, mat))| EnsembleEntry {
            prior: p,
            label,
            state: DensityOperator::from_matrix_unchecked(
                num_qubits,
                mat * Complex64::new(1.0 / p, 0.0),
            ),
        })
        .collect();
    StateEnsemble::new(entries)
}

/// How Alice behaves when her own leakage about Bob's input is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AliceMode {
    /// Classical keys sampled per the protocol.
    Honest,
    /// Coherent key registers. `constrain_parity` keeps her superposition
    /// inside the even-parity key set (preserving output correctness);
    /// without it she superposes every key vector.
    Cheating { constrain_parity: bool },
}

/// Cap for Alice-view computations (register pressure doubles per step).
pub const ALICE_VIEW_N_CAP: usize = 2;

/// Holevo information, in bits, of Alice's post-run view about Bob's `2n`
/// uniformly distributed input bits, in a linear evaluation with `x` all
/// ones and `k0` hidden.
///
/// Honest Alice has classical keys, so the quantity reduces to classical
/// mutual information between `y` and her (keys, outcomes) record. A
/// cheating Alice holds quantum key registers; her view is the
/// post-measurement key state tensored with the outcome bits, averaged
/// over Bob's hidden keys. Outcome bits are classical, so the view is
/// block-diagonal over them and entropies are computed block by block.
pub fn alice_view_holevo(n: usize, mode: AliceMode) -> Result<f64> {
    if n == 0 || n > ALICE_VIEW_N_CAP {
        return Err(Error::TooLarge {
            n,
            cap: ALICE_VIEW_N_CAP,
        });
    }
    match mode {
        AliceMode::Honest => honest_alice_view_mi(n),
        AliceMode::Cheating { constrain_parity } => cheating_alice_view_holevo(n, constrain_parity),
    }
}

/// Alice's view ensemble at `n = 1`, materialized densely: for each of
/// Bob's inputs `y` (the label), her post-run state on (outcome bits as a
/// diagonal register) tensor (key registers), averaged over Bob's hidden
/// keys. Honest keys appear as a classical diagonal register.
pub fn alice_view_ensemble(mode: AliceMode) -> Result<StateEnsemble> {
    let pairs = [(1u8, 1u8)];
    let key_vectors: Vec<Vec<AliceKeys>> = match mode {
        AliceMode::Honest | AliceMode::Cheating {
            constrain_parity: true,
        } => crate::linear::enumerate_constrained_keys(&pairs),
        AliceMode::Cheating {
            constrain_parity: false,
        } => all_key_vectors(&pairs),
    };
    let coherent = matches!(mode, AliceMode::Cheating { .. });

    // Key-register states per key vector: a basis state for honest Alice,
    // one shared superposition for the coherent preparations.
    let mut entries = Vec::with_capacity(4);
    for yv in 0..4usize {
        let y = [((yv >> 1) & 1) as u8, (yv & 1) as u8];
        let mut acc = DMatrix::from_element(512, 512, Complex64::ZERO);
        if coherent {
            let mut amps = vec![Complex64::ZERO; 64];
            let norm = (key_vectors.len() as f64).sqrt().recip();
            for keys in &key_vectors {
                let k = keys[0];
                let idx = ((k.s1 as usize) << 2 | (k.s2 as usize) << 1 | k.s3 as usize) << 3;
                let (enc, _) = p1_encode((1, 1), &k)?;
                for (j, a) in enc.amplitudes().iter().enumerate() {
                    amps[idx | j] += a * norm;
                }
            }
            let prepared = Ket::from_amplitudes(6, amps)?;
            accumulate_alice_view(&prepared, (y[0], y[1]), &mut acc, 1.0)?;
        } else {
            let w = 1.0 / key_vectors.len() as f64;
            for keys in &key_vectors {
                let k = keys[0];
                let key_state = Ket::computational(
                    3,
                    (k.s1 as usize) << 2 | (k.s2 as usize) << 1 | k.s3 as usize,
                )?;
                let (enc, _) = p1_encode((1, 1), &k)?;
                let prepared = key_state.tensor(&enc)?;
                accumulate_alice_view(&prepared, (y[0], y[1]), &mut acc, w)?;
            }
        }
        entries.push(EnsembleEntry {
            prior: 0.25,
            label: y.to_vec(),
            state: DensityOperator::from_matrix_unchecked(9, acc),
        });
    }
    StateEnsemble::new(entries)
}

/// Adds `weight` times Alice's view (outcome register tensor key
/// registers) for one prepared 6-qubit state and one Bob input, averaged
/// over Bob's hidden keys, into `acc` (512x512: 3 outcome bits + 3 key
/// qubits; the outcome register is diagonal).
fn accumulate_alice_view(
    prepared: &Ket,
    y: (u8, u8),
    acc: &mut DMatrix<Complex64>,
    weight: f64,
) -> Result<()> {
    for k in 0..4u8 {
        let mut state = prepared.clone();
        if y.0 == 1 {
            state.apply_mut(&GateSpec::new(Gate::Z, vec![3])?)?;
        }
        if y.1 == 1 {
            state.apply_mut(&GateSpec::new(Gate::Z, vec![4])?)?;
        }
        let theta = k as f64 * std::f64::consts::FRAC_PI_2;
        for q in 3..6 {
            state.apply_mut(&GateSpec::new(Gate::Rz(theta), vec![q])?)?;
        }
        for br in measure_branches(&state, &[3, 4, 5], Basis::X)?.branches {
            let keys_state = br.post_state.reduce(&[0, 1, 2])?;
            let r_index = (br.outcomes[0] as usize) << 2
                | (br.outcomes[1] as usize) << 1
                | br.outcomes[2] as usize;
            let w = weight * br.probability * 0.25;
            let m = keys_state.matrix();
            for r in 0..8 {
                for c in 0..8 {
                    acc[(r_index * 8 + r, r_index * 8 + c)] += m[(r, c)] * Complex64::new(w, 0.0);
                }
            }
        }
    }
    Ok(())
}

/// Classical route: average over Alice's own keys of `I(Y; outcomes)`.
fn honest_alice_view_mi(n: usize) -> Result<f64> {
    let pairs = vec![(1u8, 1u8); n];
    let key_vectors = crate::linear::enumerate_constrained_keys(&pairs);
    let y_count = 1usize << (2 * n);
    let mut total = 0.0;
    for keys in &key_vectors {
        let (_, states) =
            crate::linear::build_alice_state(&pairs, keys.clone(), XotVariant::P1)?;
        // p(outcomes | y), averaged over Bob's hidden keys.
        let mut conditionals = Vec::with_capacity(y_count);
        for yv in 0..y_count {
            let y = bits_of(yv, 2 * n);
            let mut dist = vec![0.0f64; 1 << (3 * n)];
            for bob in crate::linear::P3BobState::enumerate(n) {
                let weight = 1.0 / (1 << (n + 1)) as f64;
                let mut partial: Vec<(usize, f64)> = vec![(0, 1.0)];
                for (i, state) in states.iter().enumerate() {
                    let branches = crate::linear::p3_bob_instance_branches(
                        state,
                        (y[2 * i], y[2 * i + 1]),
                        XotVariant::P1,
                        bob.k0,
                        bob.k1[i],
                    )?;
                    let mut next = Vec::with_capacity(partial.len() * branches.branches.len());
                    for &(idx, p) in &partial {
                        for br in &branches.branches {
                            let mut v = idx << 3;
                            for (j, &bit) in br.outcomes.iter().enumerate() {
                                v |= (bit as usize) << (2 - j);
                            }
                            next.push((v, p * br.probability));
                        }
                    }
                    partial = next;
                }
                for (idx, p) in partial {
                    dist[idx] += weight * p;
                }
            }
            conditionals.push(dist);
        }
        let priors = vec![1.0 / y_count as f64; y_count];
        total += crate::qsim::mutual_information(&priors, &conditionals);
    }
    Ok(total / key_vectors.len() as f64)
}

/// Quantum route: coherent keys, block-diagonal view over outcome bits.
fn cheating_alice_view_holevo(n: usize, constrain_parity: bool) -> Result<f64> {
    let pairs = vec![(1u8, 1u8); n];
    let key_qubits = 3 * n;
    let protocol_qubits = 3 * n;
    let key_vectors: Vec<Vec<AliceKeys>> = if constrain_parity {
        crate::linear::enumerate_constrained_keys(&pairs)
    } else {
        all_key_vectors(&pairs)
    };

    // Coherent preparation over the chosen key set.
    let dim = 1usize << (key_qubits + protocol_qubits);
    let mut amps = vec![Complex64::ZERO; dim];
    let norm = (key_vectors.len() as f64).sqrt().recip();
    for keys in &key_vectors {
        let mut key_index = 0usize;
        let mut protocol = Ket::basis_bit(0); // placeholder, replaced below
        for (i, k) in keys.iter().enumerate() {
            key_index = key_index << 3 | ((k.s1 as usize) << 2 | (k.s2 as usize) << 1 | k.s3 as usize);
            let (state, _) = p1_encode(pairs[i], k)?;
            protocol = if i == 0 { state } else { protocol.tensor(&state)? };
        }
        for (j, a) in protocol.amplitudes().iter().enumerate() {
            amps[(key_index << protocol_qubits) | j] += a * norm;
        }
    }
    let prepared = Ket::from_amplitudes(key_qubits + protocol_qubits, amps)?;

    let y_count = 1usize << (2 * n);
    let protocol_indices: Vec<usize> = (key_qubits..key_qubits + protocol_qubits).collect();

    // Per label y: outcome-indexed blocks of the key-register state.
    let mut per_label: Vec<OutcomeBlocks> = Vec::new();
    for yv in 0..y_count {
        let y = bits_of(yv, 2 * n);
        let mut blocks: OutcomeBlocks = BTreeMap::new();
        for bob in crate::linear::P3BobState::enumerate(n) {
            let bob_weight = 1.0 / (1 << (n + 1)) as f64;
            let mut state = prepared.clone();
            for i in 0..n {
                let base = key_qubits + 3 * i;
                if y[2 * i] == 1 {
                    state.apply_mut(&GateSpec::new(Gate::Z, vec![base])?)?;
                }
                if y[2 * i + 1] == 1 {
                    state.apply_mut(&GateSpec::new(Gate::Z, vec![base + 1])?)?;
                }
                let k = 2 * bob.k1[i] + bob.k0;
                let theta = k as f64 * std::f64::consts::FRAC_PI_2;
                for q in 0..3 {
                    state.apply_mut(&GateSpec::new(Gate::Rz(theta), vec![base + q])?)?;
                }
            }
            for br in measure_branches(&state, &protocol_indices, Basis::X)?.branches {
                // The measured qubits sit in X eigenstates; rotate each to
                // the computational basis and factor it out, leaving the
                // pure key-register state. After each removal the next
                // protocol qubit slides into position `key_qubits`.
                let mut keys_state = br.post_state.clone();
                for j in 0..protocol_indices.len() {
                    keys_state.apply_mut(&GateSpec::new(Gate::H, vec![key_qubits])?)?;
                    keys_state = keys_state.factor_out(key_qubits, br.outcomes[j])?;
                }
                let key_dim = 1usize << key_qubits;
                let slot = blocks.entry(br.outcomes.clone()).or_insert_with(|| {
                    (0.0, DMatrix::from_element(key_dim, key_dim, Complex64::ZERO))
                });
                let w = bob_weight * br.probability;
                slot.0 += w;
                let amps = keys_state.amplitudes();
                for r in 0..key_dim {
                    for c in 0..key_dim {
                        slot.1[(r, c)] += amps[r] * amps[c].conj() * w;
                    }
                }
            }
        }
        per_label.push(blocks);
    }

    // Holevo over block-diagonal states: S(rho) for a state that is
    // block-diagonal over classical outcome bits is H(block probs) plus the
    // probability-weighted block entropies.
    let label_prior = 1.0 / y_count as f64;
    let mut avg_blocks: OutcomeBlocks = BTreeMap::new();
    let mut mean_label_entropy = 0.0;
    for blocks in &per_label {
        mean_label_entropy += label_prior * block_state_entropy(blocks);
        for (key, (p, mat)) in blocks {
            let slot = avg_blocks.entry(key.clone()).or_insert_with(|| {
                (
                    0.0,
                    DMatrix::from_element(mat.nrows(), mat.nrows(), Complex64::ZERO),
                )
            });
            slot.0 += label_prior * p;
            slot.1 += mat * Complex64::new(label_prior, 0.0);
        }
    }
    let avg_entropy = block_state_entropy(&avg_blocks);
    Ok((avg_entropy - mean_label_entropy).max(0.0))
}

/// Entropy in bits of a block-diagonal state given as unnormalized blocks.
fn block_state_entropy(blocks: &OutcomeBlocks) -> f64 {
    let probs: Vec<f64> = blocks.values().map(|(p, _)| *p).collect();
    let mut entropy = shannon_entropy(&probs);
    for (p, mat) in blocks.values() {
        if *p > crate::tol::EIG_CUTOFF {
            let normalized = mat * Complex64::new(1.0 / p, 0.0);
            let n_qubits = (mat.nrows() as f64).log2() as usize;
            entropy += p * von_neumann_entropy(&DensityOperator::from_matrix_unchecked(
                n_qubits, normalized,
            ));
        }
    }
    entropy
}

fn all_key_vectors(pairs: &[(u8, u8)]) -> Vec<Vec<AliceKeys>> {
    let per_instance: Vec<Vec<AliceKeys>> =
        pairs.iter().map(|&p| AliceKeys::enumerate(p)).collect();
    let mut out = vec![Vec::new()];
    for options in &per_instance {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for &opt in options {
                let mut v = prefix.clone();
                v.push(opt);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Named measurement strategies for Bob plus the Holevo bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BobStrategy {
    ZBasis,
    BellGuess,
    OptimalHolevo,
}

impl BobStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            BobStrategy::ZBasis => "Z_basis",
            BobStrategy::BellGuess => "Bell_guess",
            BobStrategy::OptimalHolevo => "holevo",
        }
    }
}

impl std::str::FromStr for BobStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "z" | "z_basis" | "zbasis" => Ok(BobStrategy::ZBasis),
            "bell" | "bell_guess" | "bellguess" => Ok(BobStrategy::BellGuess),
            "holevo" | "optimal_holevo" => Ok(BobStrategy::OptimalHolevo),
            other => Err(Error::OutOfRange {
                what: format!("strategy '{other}'"),
                value: 0,
            }),
        }
    }
}

/// A leakage scenario to evaluate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: String,
    pub n: usize,
    pub prior: Prior,
    pub strategies: Vec<BobStrategy>,
}

/// Computed leakage figures for one scenario.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeakageReport {
    pub scenario: String,
    pub n: usize,
    pub prior: String,
    pub strategy_bits: BTreeMap<String, f64>,
    pub holevo_bits: f64,
    pub entropy_of_secret: f64,
    pub notes: String,
}

impl LeakageReport {
    /// Every strategy value sits below the Holevo bound, which sits below
    /// the entropy of the secret.
    pub fn validate(&self) -> Result<()> {
        for (name, &bits) in &self.strategy_bits {
            if bits < -1e-12 || bits > self.holevo_bits + 1e-9 {
                return Err(Error::InternalCheck(format!(
                    "strategy {name} = {bits} outside [0, holevo = {}]",
                    self.holevo_bits
                )));
            }
        }
        if self.holevo_bits > self.entropy_of_secret + 1e-9 {
            return Err(Error::InternalCheck(format!(
                "holevo {} exceeds secret entropy {}",
                self.holevo_bits, self.entropy_of_secret
            )));
        }
        Ok(())
    }

    /// CSV table with one row per strategy; reals carry 9 significant
    /// digits so report files are byte-stable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario,n,prior,strategy,bits\n");
        for (name, bits) in &self.strategy_bits {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.scenario,
                self.n,
                self.prior,
                name,
                format_sig9(*bits)
            ));
        }
        out.push_str(&format!(
            "{},{},{},holevo,{}\n",
            self.scenario,
            self.n,
            self.prior,
            format_sig9(self.holevo_bits)
        ));
        out.push_str(&format!(
            "{},{},{},secret_entropy,{}\n",
            self.scenario,
            self.n,
            self.prior,
            format_sig9(self.entropy_of_secret)
        ));
        out
    }
}

/// Builds the report for a scenario, evaluating each requested strategy on
/// Bob's protocol ensemble and validating the information chain.
pub fn make_report(spec: &ScenarioSpec) -> Result<LeakageReport> {
    let ensemble = bob_view_ensemble(spec.n, &spec.prior)?;
    let holevo_bits = holevo_information(&ensemble)?;
    let mut strategy_bits = BTreeMap::new();
    for strategy in &spec.strategies {
        if *strategy == BobStrategy::OptimalHolevo {
            continue; // reported separately as the bound
        }
        let bits = crate::attack::bob_attack_info(*strategy, spec.n, &spec.prior)?;
        strategy_bits.insert(strategy.name().to_string(), bits);
    }
    let report = LeakageReport {
        scenario: spec.id.clone(),
        n: spec.n,
        prior: spec.prior.describe(),
        strategy_bits,
        holevo_bits,
        entropy_of_secret: ensemble.label_entropy(),
        notes: String::new(),
    };
    report.validate()?;
    Ok(report)
}

/// Formats a real with 9 significant digits.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return "0.00000000".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}
