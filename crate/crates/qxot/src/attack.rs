//! The documented cheating strategies for both parties, with exact success
//! accounting by branch enumeration.
//!
//! A cheating Alice runs P1 with quantum key registers S1, S2, S3 prepared
//! in `|+>` and a coherent (unitary) version of the encoding, so the keys
//! stay entangled with the three protocol qubits. Bob cannot tell: the
//! reduced state he receives is exactly the honest key average. After his
//! message arrives, phase information gathered in the key registers lets
//! her recover both of his input bits, for every target choice.
//!
//! Bob-side strategies measure his received ensemble of a linear
//! evaluation run: all-Z, Bell-basis measurements on guessed pair
//! positions, or the Holevo bound itself.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::leakage::{bob_view_ensemble, BobStrategy, Prior};
use crate::qsim::{
    bell_state, holevo_information, measure_branches, measured_mutual_information,
    measured_mutual_information_computational, Basis, DensityOperator, Gate, GateSpec, Ket, Povm,
};
use crate::xot::{assemble_three, AliceKeys, XotVariant};
use crate::{Error, Result};

/// Which of Bob's quantities Alice's protocol output reveals; fixes her
/// default input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackTarget {
    Y1,
    Y2,
    Xor,
}

impl AttackTarget {
    /// Default input: a 1 wherever the targeted bit appears in `f`.
    pub fn default_input(&self) -> (u8, u8) {
        match self {
            AttackTarget::Y1 => (1, 0),
            AttackTarget::Y2 => (0, 1),
            AttackTarget::Xor => (1, 1),
        }
    }
}

impl std::str::FromStr for AttackTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "y1" => Ok(AttackTarget::Y1),
            "y2" => Ok(AttackTarget::Y2),
            "xor" | "y1y2" | "y1^y2" => Ok(AttackTarget::Xor),
            other => Err(Error::InvalidAttack(format!("unknown target '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CheatAliceConfig {
    pub target: AttackTarget,
    pub variant: XotVariant,
    /// Entangle the filler qubit with S3 as `|0>|+> + |1>|->`. Required to
    /// read the high key bit when `k0 = 1`; without it S3 holds a classical
    /// `fixed_s3` and the attack degrades exactly as an honest preparation
    /// does.
    pub entangle_third: bool,
    /// Classical filler key used when `entangle_third` is off.
    pub fixed_s3: u8,
}

impl CheatAliceConfig {
    pub fn new(target: AttackTarget, variant: XotVariant, entangle_third: bool) -> Self {
        Self {
            target,
            variant,
            entangle_third,
            fixed_s3: 0,
        }
    }

    fn check(&self) -> Result<()> {
        if self.variant != XotVariant::P1 {
            return Err(Error::InvalidAttack(format!(
                "coherent-key preparation is defined for variant p1, not {}",
                self.variant
            )));
        }
        Ok(())
    }
}

/// The joint state on key registers S1, S2, S3 (qubits 0-2) and the three
/// protocol qubits (3-5): an equal superposition over key values of the
/// honest encodings.
pub fn cheat_alice_prepare(config: &CheatAliceConfig) -> Result<Ket> {
    config.check()?;
    let x = config.target.default_input();
    let mut amps = vec![Complex64::ZERO; 64];
    let s3_values: &[u8] = if config.entangle_third {
        &[0, 1]
    } else {
        std::slice::from_ref(&config.fixed_s3)
    };
    let key_count = (4 * s3_values.len()) as f64;
    let norm = key_count.sqrt().recip();
    for s1 in 0..2u8 {
        for s2 in 0..2u8 {
            for &s3 in s3_values {
                // With entangle_third off, S3 still records the classical
                // key so the register layout is uniform.
                let keys = AliceKeys::new(x, s1, s2, s3, x)?;
                let (enc, _) = crate::xot::p1_encode(x, &keys)?;
                let key_index = ((s1 as usize) << 2) | ((s2 as usize) << 1) | s3 as usize;
                for (j, a) in enc.amplitudes().iter().enumerate() {
                    amps[(key_index << 3) | j] += a * norm;
                }
            }
        }
    }
    Ket::from_amplitudes(6, amps)
}

/// Measurement-outcome distribution of projecting qubits `(qa, qb)` of
/// `state` onto a rank-1 vector given in the `(|00>, |01>, |10>, |11>)`
/// component order of the pair.
fn pair_projection_probability(state: &Ket, qa: usize, qb: usize, vec4: &[Complex64; 4]) -> f64 {
    let n = state.num_qubits();
    let ma = 1usize << (n - 1 - qa);
    let mb = 1usize << (n - 1 - qb);
    let amps = state.amplitudes();
    let mut p = 0.0;
    for i in 0..amps.len() {
        if i & ma == 0 && i & mb == 0 {
            let overlap = vec4[0].conj() * amps[i]
                + vec4[1].conj() * amps[i | mb]
                + vec4[2].conj() * amps[i | ma]
                + vec4[3].conj() * amps[i | ma | mb];
            p += overlap.norm_sqr();
        }
    }
    p
}

/// Distribution over `(y1, y2)` guesses produced by Alice's extraction
/// measurements on the post-message key registers.
///
/// The readout, frozen from the branch algebra of the coherent encoding:
/// conditioned on Bob's outcome bits, the key state is
/// `|0, a> + i^{-k} (-1)^theta |1, a XOR k0>` on S1 S2 (up to phase)
/// tensored with an S3 state that collapses to the computational basis for
/// even `k` and to the Y basis for odd `k`. Here `a = f XOR r_u XOR r_v`
/// over the picked positions `(u, v)`, and `theta` is `r_v` plus the `y`
/// bit applied to qubit `v` (if any). Hence:
///
/// * `k0 = 0` - measure S3 in Z, S2 in Z, S1 in X; then
///   `k1 = m3 XOR tau`, `m1 = k1 XOR theta`.
/// * `k0 = 1` - measure S3 in Y (`m3 = tau XOR k1 XOR 1`) and S1 S2
///   jointly in the orthonormal family
///   `(|0,a> - i(-1)^c |1,a XOR 1>)/sqrt(2)`, which yields `(a, c)` with
///   `c = k1 XOR theta`.
///
/// Solving the three relations per target recovers both of Bob's bits.
pub fn cheat_alice_extract(
    post_key_state: &Ket,
    outcomes: &[u8],
    k0: u8,
    config: &CheatAliceConfig,
) -> Result<Vec<((u8, u8), f64)>> {
    config.check()?;
    if outcomes.len() != 3 {
        return Err(Error::LengthMismatch {
            expected: 3,
            got: outcomes.len(),
        });
    }
    let r = [outcomes[0] & 1, outcomes[1] & 1, outcomes[2] & 1];
    let mut guesses: Vec<((u8, u8), f64)> = Vec::new();

    let s3_basis = if k0 & 1 == 0 { Basis::Z } else { Basis::Y };
    for s3_branch in measure_branches(post_key_state, &[2], s3_basis)?.branches {
        let m3 = s3_branch.outcomes[0];
        if k0 & 1 == 0 {
            // S2 in Z gives `a`; S1 in X gives `m1 = k1 XOR theta`.
            for s2_branch in measure_branches(&s3_branch.post_state, &[1], Basis::Z)?.branches {
                let a = s2_branch.outcomes[0];
                for s1_branch in
                    measure_branches(&s2_branch.post_state, &[0], Basis::X)?.branches
                {
                    let m1 = s1_branch.outcomes[0];
                    let guess = solve_for_y(config.target, &r, k0, a, m1, m3);
                    push_guess(
                        &mut guesses,
                        guess,
                        s3_branch.probability * s2_branch.probability * s1_branch.probability,
                    );
                }
            }
        } else {
            // Joint S1 S2 readout in the phase-sensitive pair basis.
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            for a in 0..2u8 {
                for c in 0..2u8 {
                    let phase = Complex64::new(0.0, if c == 1 { 1.0 } else { -1.0 });
                    let mut vec4 = [Complex64::ZERO; 4];
                    vec4[a as usize] = h; // |0, a>
                    vec4[0b10 | (a ^ 1) as usize] = phase * h; // -i(-1)^c |1, a^1>
                    let p =
                        pair_projection_probability(&s3_branch.post_state, 0, 1, &vec4);
                    if p > crate::tol::BRANCH_PRUNE {
                        let guess = solve_for_y(config.target, &r, k0, a, c, m3);
                        push_guess(&mut guesses, guess, s3_branch.probability * p);
                    }
                }
            }
        }
    }
    Ok(guesses)
}

fn push_guess(guesses: &mut Vec<((u8, u8), f64)>, guess: (u8, u8), p: f64) {
    if let Some(slot) = guesses.iter_mut().find(|(g, _)| *g == guess) {
        slot.1 += p;
    } else {
        guesses.push((guess, p));
    }
}

/// The frozen selection table relating measured key bits to `(y1, y2)`.
fn solve_for_y(target: AttackTarget, r: &[u8; 3], k0: u8, a: u8, c: u8, m3: u8) -> (u8, u8) {
    let odd = k0 & 1;
    match target {
        AttackTarget::Xor => {
            // pair (1,2), filler 3: theta = r2 XOR y2, tau = r3.
            let f = a ^ r[0] ^ r[1];
            let k1 = m3 ^ r[2] ^ odd;
            let y2 = c ^ k1 ^ r[1];
            (f ^ y2, y2)
        }
        AttackTarget::Y1 => {
            // pair (1,3), filler 2: theta = r3, tau = r2 XOR y2.
            let f = a ^ r[0] ^ r[2];
            let k1 = c ^ r[2];
            let y2 = m3 ^ r[1] ^ k1 ^ odd;
            (f, y2)
        }
        AttackTarget::Y2 => {
            // pair (2,3), filler 1: theta = r3, tau = r1 XOR y1.
            let f = a ^ r[1] ^ r[2];
            let k1 = c ^ r[2];
            let y1 = m3 ^ r[0] ^ k1 ^ odd;
            (y1, f)
        }
    }
}

/// Success accounting for one true `(y, k)` cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttackCell {
    pub y: (u8, u8),
    pub k: u8,
    /// Guess distribution over `(y1, y2)` indexed `2*y1 + y2`; sums to 1.
    pub guess_distribution: [f64; 4],
    pub success: f64,
}

/// Full result of an attack evaluation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttackResult {
    pub target: AttackTarget,
    pub variant: XotVariant,
    pub entangle_third: bool,
    pub cells: Vec<AttackCell>,
    pub average_success: f64,
    /// The message pattern of one protocol round; identical to an honest
    /// run, which is the point of the undetectability claim.
    pub transcript: Vec<crate::xot::Message>,
}

impl AttackResult {
    pub fn validate(&self) -> Result<()> {
        for cell in &self.cells {
            let total: f64 = cell.guess_distribution.iter().sum();
            if (total - 1.0).abs() > crate::tol::PROB {
                return Err(Error::InternalCheck(format!(
                    "guess distribution sums to {total}"
                )));
            }
            if !(0.0..=1.0 + 1e-12).contains(&cell.success) {
                return Err(Error::InternalCheck(format!(
                    "success {} outside [0,1]",
                    cell.success
                )));
            }
        }
        Ok(())
    }
}

/// The fixed message pattern of one P1 round: three labelled qubits out,
/// three outcome bits plus `k0` back.
fn p1_message_pattern() -> Vec<crate::xot::Message> {
    use crate::xot::{Direction, Message, Payload};
    vec![
        Message {
            dir: Direction::AliceToBob,
            payload: Payload::Qubits {
                labels: vec![1, 2, 3],
            },
        },
        Message {
            dir: Direction::BobToAlice,
            payload: Payload::Bits {
                bits: vec![0, 0, 0, 0],
            },
        },
    ]
}

/// Enumerates Bob's `y`, his key `k`, and every measurement branch, running
/// the extraction on each conditioned key state. Reports per-cell and
/// average success of recovering both bits.
pub fn run_cheat_alice(config: &CheatAliceConfig) -> Result<AttackResult> {
    config.check()?;
    let prepared = cheat_alice_prepare(config)?;
    let mut cells = Vec::with_capacity(16);
    let mut average = 0.0;
    for yv in 0..4u8 {
        let y = ((yv >> 1) & 1, yv & 1);
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
            let mut dist = [0.0f64; 4];
            let mut success = 0.0;
            for branch in measure_branches(&state, &[3, 4, 5], Basis::X)?.branches {
                let guesses =
                    cheat_alice_extract(&branch.post_state, &branch.outcomes, k % 2, config)?;
                for ((g1, g2), p) in guesses {
                    let w = branch.probability * p;
                    dist[(2 * g1 + g2) as usize] += w;
                    if (g1, g2) == y {
                        success += w;
                    }
                }
            }
            average += success / 16.0;
            cells.push(AttackCell {
                y,
                k,
                guess_distribution: dist,
                success,
            });
        }
    }
    let result = AttackResult {
        target: config.target,
        variant: config.variant,
        entangle_third: config.entangle_third,
        cells,
        average_success: average,
        transcript: p1_message_pattern(),
    };
    result.validate()?;
    Ok(result)
}

/// Honest-Alice ceiling: classical keys, Bayes-optimal guessing from her
/// view `(outcome bits, k0)` given her keys. The decoded target bit is
/// certain and the other bit stays uniform, so the average success of
/// recovering both bits is exactly 1/2.
pub fn honest_alice_baseline(target: AttackTarget) -> Result<AttackResult> {
    let x = target.default_input();
    let key_set = AliceKeys::enumerate(x);
    let mut cells: Vec<AttackCell> = (0..16)
        .map(|i| AttackCell {
            y: (((i >> 1) & 1) as u8, (i & 1) as u8),
            k: ((i >> 2) & 3) as u8,
            guess_distribution: [0.0; 4],
            success: 0.0,
        })
        .collect();

    for keys in &key_set {
        let (state, _) = crate::xot::p1_encode(x, keys)?;
        // p(r | y, k) for all cells under these keys.
        let mut table = Vec::new();
        for yv in 0..4u8 {
            let y = ((yv >> 1) & 1, yv & 1);
            for k in 0..4u8 {
                let (branches, _) = crate::xot::p1_bob_step(&state, y, k)?;
                table.push(((y, k), branches));
            }
        }
        // Posterior over y given the view (r, k0), marginalizing the
        // hidden k1.
        for view_r in 0..8usize {
            let r = [
                ((view_r >> 2) & 1) as u8,
                ((view_r >> 1) & 1) as u8,
                (view_r & 1) as u8,
            ];
            for view_k0 in 0..2u8 {
                let mut posterior = [0.0f64; 4];
                for ((y, k), branches) in &table {
                    if k % 2 != view_k0 {
                        continue;
                    }
                    if let Some(b) = branches.find(&r) {
                        posterior[(2 * y.0 + y.1) as usize] += b.probability;
                    }
                }
                let total: f64 = posterior.iter().sum();
                if total <= 0.0 {
                    continue;
                }
                let best = posterior.iter().cloned().fold(0.0, f64::max);
                let ties: Vec<usize> = (0..4).filter(|&i| posterior[i] >= best - 1e-12).collect();
                // Optimal guess with uniform tie-breaking.
                for ((y, k), branches) in &table {
                    if k % 2 != view_k0 {
                        continue;
                    }
                    if let Some(b) = branches.find(&r) {
                        let cell = cells
                            .iter_mut()
                            .find(|c| c.y == *y && c.k == *k)
                            .expect("cell exists");
                        let w = b.probability / key_set.len() as f64;
                        for &g in &ties {
                            cell.guess_distribution[g] += w / ties.len() as f64;
                            if g == (2 * y.0 + y.1) as usize {
                                cell.success += w / ties.len() as f64;
                            }
                        }
                    }
                }
            }
        }
    }
    let average = cells.iter().map(|c| c.success).sum::<f64>() / 16.0;
    let result = AttackResult {
        target,
        variant: XotVariant::P1,
        entangle_third: false,
        cells,
        average_success: average,
        transcript: p1_message_pattern(),
    };
    result.validate()?;
    Ok(result)
}

/// Bits of information the named Bob strategy extracts about Alice's input
/// vector in a linear evaluation of `n` instances under `prior`.
pub fn bob_attack_info(strategy: BobStrategy, n: usize, prior: &Prior) -> Result<f64> {
    let ensemble = bob_view_ensemble(n, prior)?;
    match strategy {
        BobStrategy::ZBasis => measured_mutual_information_computational(&ensemble),
        BobStrategy::OptimalHolevo => holevo_information(&ensemble),
        BobStrategy::BellGuess => {
            if n > 2 {
                return Err(Error::TooLarge { n, cap: 2 });
            }
            let per_position: Vec<Vec<DMatrix<Complex64>>> = [(1usize, 2usize), (1, 3), (2, 3)]
                .iter()
                .map(|&(first, second)| bell_position_effects(first, second))
                .collect::<Result<_>>()?;
            let mut best: f64 = 0.0;
            let mut guess = vec![0usize; n];
            loop {
                let mut effects: Vec<DMatrix<Complex64>> = per_position[guess[0]].clone();
                for &g in &guess[1..] {
                    let mut next = Vec::with_capacity(effects.len() * 8);
                    for e in &effects {
                        for f in &per_position[g] {
                            next.push(e.kronecker(f));
                        }
                    }
                    effects = next;
                }
                let povm = Povm::new(effects)?;
                best = best.max(measured_mutual_information(&ensemble, &povm)?);
                let mut i = 0;
                loop {
                    if i == n {
                        return Ok(best);
                    }
                    guess[i] += 1;
                    if guess[i] < 3 {
                        break;
                    }
                    guess[i] = 0;
                    i += 1;
                }
            }
        }
    }
}

/// The 8 projectors of a Bell measurement on labels `(first, second)`
/// combined with a Z measurement of the remaining qubit of one instance.
fn bell_position_effects(first: usize, second: usize) -> Result<Vec<DMatrix<Complex64>>> {
    let mut effects = Vec::with_capacity(8);
    for code in 0..4u8 {
        let pair = bell_state((code >> 1, code & 1));
        for z in 0..2u8 {
            let ket = assemble_three(&pair, first, second, &Ket::basis_bit(z))?;
            effects.push(DensityOperator::from_ket(&ket).matrix().clone());
        }
    }
    Ok(effects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::trace_distance;

    #[test]
    fn coherent_preparation_is_undetectable() {
        for target in [AttackTarget::Y1, AttackTarget::Y2, AttackTarget::Xor] {
            let config = CheatAliceConfig::new(target, XotVariant::P1, true);
            let state = cheat_alice_prepare(&config).unwrap();
            let on_wire = state.reduce(&[3, 4, 5]).unwrap();
            let mixed = DensityOperator::maximally_mixed(3);
            assert!(trace_distance(&on_wire, &mixed).unwrap() < 1e-12);
            // Key registers alone are also maximally mixed.
            let keys = state.reduce(&[0, 1, 2]).unwrap();
            assert!(trace_distance(&keys, &mixed).unwrap() < 1e-12);
        }
    }

    #[test]
    fn non_entangled_preparation_keeps_filler_classical() {
        let mut config = CheatAliceConfig::new(AttackTarget::Xor, XotVariant::P1, false);
        config.fixed_s3 = 1;
        let state = cheat_alice_prepare(&config).unwrap();
        // S3 register is |1> exactly.
        let s3 = state.reduce(&[2]).unwrap();
        let one = DensityOperator::from_ket(&Ket::basis_bit(1));
        assert!(trace_distance(&s3, &one).unwrap() < 1e-12);
    }

    #[test]
    fn cheating_alice_recovers_both_bits_for_every_target() {
        for target in [AttackTarget::Y1, AttackTarget::Y2, AttackTarget::Xor] {
            let config = CheatAliceConfig::new(target, XotVariant::P1, true);
            let result = run_cheat_alice(&config).unwrap();
            assert!(
                (result.average_success - 1.0).abs() < 1e-9,
                "target {target:?}: avg {}",
                result.average_success
            );
            for cell in &result.cells {
                assert!((cell.success - 1.0).abs() < 1e-9, "cell {cell:?}");
            }
        }
    }

    #[test]
    fn deterministic_extraction_example() {
        // True y = (1, 0), k0 = 0: every branch yields the exact guess.
        let config = CheatAliceConfig::new(AttackTarget::Xor, XotVariant::P1, true);
        let mut state = cheat_alice_prepare(&config).unwrap();
        state
            .apply_mut(&GateSpec::new(Gate::Z, vec![3]).unwrap())
            .unwrap();
        // k = 0: no rotation.
        for branch in measure_branches(&state, &[3, 4, 5], Basis::X)
            .unwrap()
            .branches
        {
            let guesses =
                cheat_alice_extract(&branch.post_state, &branch.outcomes, 0, &config).unwrap();
            assert_eq!(guesses.len(), 1);
            assert_eq!(guesses[0].0, (1, 0));
            assert!((guesses[0].1 - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn unentangled_alice_cannot_beat_the_odd_k_branch() {
        // Without the S3 entanglement, k0 = 1 rounds give her no handle on
        // k1, so the non-target bit guess degrades to chance on those
        // rounds. Averaged over k, success drops to 3/4 overall.
        let config = CheatAliceConfig {
            target: AttackTarget::Xor,
            variant: XotVariant::P1,
            entangle_third: false,
            fixed_s3: 0,
        };
        let result = run_cheat_alice(&config).unwrap();
        assert!(result.average_success < 1.0 - 1e-6);
        for cell in &result.cells {
            if cell.k % 2 == 0 {
                assert!((cell.success - 1.0).abs() < 1e-9, "even-k cell {cell:?}");
            } else {
                assert!((cell.success - 0.5).abs() < 1e-9, "odd-k cell {cell:?}");
            }
        }
    }

    #[test]
    fn honest_baseline_success_is_one_half() {
        for target in [AttackTarget::Y1, AttackTarget::Y2, AttackTarget::Xor] {
            let result = honest_alice_baseline(target).unwrap();
            assert!(
                (result.average_success - 0.5).abs() < 1e-9,
                "target {target:?}: avg {}",
                result.average_success
            );
        }
    }

    #[test]
    fn attack_rejects_other_variants() {
        let config = CheatAliceConfig::new(AttackTarget::Xor, XotVariant::P2, true);
        assert!(run_cheat_alice(&config).is_err());
    }

    #[test]
    fn point_prior_gives_zero_information_for_every_strategy() {
        let prior = Prior::Point(vec![1, 0]);
        for strategy in [
            BobStrategy::ZBasis,
            BobStrategy::BellGuess,
            BobStrategy::OptimalHolevo,
        ] {
            let bits = bob_attack_info(strategy, 1, &prior).unwrap();
            assert!(bits < 1e-10, "{strategy:?} leaked {bits}");
        }
    }

    #[test]
    fn bell_position_effects_form_a_povm() {
        for (first, second) in [(1, 2), (1, 3), (2, 3)] {
            let effects = bell_position_effects(first, second).unwrap();
            Povm::new(effects).unwrap();
        }
    }
}
