use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qsim::ket::Ket;
use crate::{tol, Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Single-qubit measurement basis.
///
/// Outcome 0 corresponds to `|+>`, `|0>`, `|+i>` for X, Z, Y respectively.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
    Y,
}

impl Basis {
    /// The eigenvector associated with `outcome` as `(c0, c1)` components.
    pub fn eigenvector(self, outcome: u8) -> [Complex64; 2] {
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let sign = if outcome & 1 == 1 { -1.0 } else { 1.0 };
        match self {
            Basis::Z => {
                if outcome & 1 == 0 {
                    [Complex64::ONE, Complex64::ZERO]
                } else {
                    [Complex64::ZERO, Complex64::ONE]
                }
            }
            Basis::X => [r, r * sign],
            Basis::Y => [r, Complex64::new(0.0, sign * FRAC_1_SQRT_2)],
        }
    }
}

/// One measurement outcome: the recorded bits, its probability, and the
/// renormalized post-measurement state (same register size; measured qubits
/// are collapsed, not discarded).
#[derive(Clone, Debug)]
pub struct Branch {
    pub outcomes: Vec<u8>,
    pub probability: f64,
    pub post_state: Ket,
}

/// Exhaustive enumeration of all measurement outcomes with nonzero
/// probability.
#[derive(Clone, Debug)]
pub struct BranchSet {
    pub branches: Vec<Branch>,
}

impl BranchSet {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Draws one branch according to its probability.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Branch {
        let mut u: f64 = rng.gen::<f64>() * self.total_probability();
        for b in &self.branches {
            if u < b.probability {
                return b;
            }
            u -= b.probability;
        }
        self.branches.last().expect("branch set is never empty")
    }

    /// Looks up the branch with the given outcome bits, if present.
    pub fn find(&self, outcomes: &[u8]) -> Option<&Branch> {
        self.branches.iter().find(|b| b.outcomes == outcomes)
    }
}

/// Measures `targets` (in order) in the given basis, enumerating every
/// outcome combination. Branches with probability below
/// [`tol::BRANCH_PRUNE`] are omitted; the rest sum to 1 within
/// [`tol::PROB`].
pub fn measure_branches(state: &Ket, targets: &[usize], basis: Basis) -> Result<BranchSet> {
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= state.num_qubits() {
            return Err(Error::QubitOutOfRange {
                index: t,
                num_qubits: state.num_qubits(),
            });
        }
        if targets[..i].contains(&t) {
            return Err(Error::DuplicateTarget(t));
        }
    }

    let mut branches = Vec::new();
    let count = 1usize << targets.len();
    for combo in 0..count {
        let outcomes: Vec<u8> = (0..targets.len())
            .map(|j| ((combo >> (targets.len() - 1 - j)) & 1) as u8)
            .collect();
        let mut work = state.clone();
        for (j, &t) in targets.iter().enumerate() {
            project_qubit(&mut work, t, basis, outcomes[j]);
        }
        let probability = work.norm().powi(2);
        if probability > tol::BRANCH_PRUNE {
            work.renormalize();
            branches.push(Branch {
                outcomes,
                probability,
                post_state: work,
            });
        }
    }
    Ok(BranchSet { branches })
}

/// Applies the rank-1 projector `|v><v|` on one qubit, leaving the state
/// unnormalized.
fn project_qubit(state: &mut Ket, qubit: usize, basis: Basis, outcome: u8) {
    let v = basis.eigenvector(outcome);
    let n = state.num_qubits();
    let mask = 1usize << (n - 1 - qubit);
    let amps = state.amplitudes_mut();
    for i in 0..amps.len() {
        if i & mask == 0 {
            let j = i | mask;
            let overlap = v[0].conj() * amps[i] + v[1].conj() * amps[j];
            amps[i] = overlap * v[0];
            amps[j] = overlap * v[1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::gate::{Gate, GateSpec};
    use crate::qsim::ket::bell_state;

    #[test]
    fn x_basis_eigenstate_gives_single_branch() {
        let plus = Ket::plus_minus(0);
        let set = measure_branches(&plus, &[0], Basis::X).unwrap();
        assert_eq!(set.branches.len(), 1);
        assert_eq!(set.branches[0].outcomes, vec![0]);
        assert!((set.branches[0].probability - 1.0).abs() < tol::PROB);
    }

    #[test]
    fn z_basis_on_a_bell_pair_collapses_both_qubits() {
        // First qubit of (|00>+|11>)/sqrt(2): outcome 0 -> |00>, 1 -> |11>.
        let b = bell_state((1, 0));
        let set = measure_branches(&b, &[0], Basis::Z).unwrap();
        assert_eq!(set.branches.len(), 2);
        for br in &set.branches {
            assert!((br.probability - 0.5).abs() < tol::PROB);
            let idx = if br.outcomes[0] == 0 { 0b00 } else { 0b11 };
            let expect = Ket::computational(2, idx).unwrap();
            assert!((br.post_state.fidelity(&expect) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn x_basis_branches_of_the_phase_gathered_bell_state() {
        // Z on qubit 0 followed by Rz(pi) on both qubits of bell(0,0) leaves
        // (up to sign) the anti-symmetric Bell state; its two-qubit X-basis
        // outcomes are the anti-correlated pairs with probability 1/2 each.
        let pi = std::f64::consts::PI;
        let state = bell_state((0, 0))
            .apply(&GateSpec::new(Gate::Z, vec![0]).unwrap())
            .unwrap()
            .apply(&GateSpec::new(Gate::Rz(pi), vec![0]).unwrap())
            .unwrap()
            .apply(&GateSpec::new(Gate::Rz(pi), vec![1]).unwrap())
            .unwrap();
        let set = measure_branches(&state, &[0, 1], Basis::X).unwrap();
        assert_eq!(set.branches.len(), 2);
        let mut seen = Vec::new();
        for br in &set.branches {
            assert!((br.probability - 0.5).abs() < tol::PROB);
            seen.push(br.outcomes.clone());
            // Post states are |+-> / |-+> up to phase.
            let pm = Ket::plus_minus(br.outcomes[0])
                .tensor(&Ket::plus_minus(br.outcomes[1]))
                .unwrap();
            assert!((br.post_state.fidelity(&pm) - 1.0).abs() < 1e-12);
        }
        seen.sort();
        assert_eq!(seen, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn y_basis_outcome_zero_is_plus_i() {
        let plus_i = Ket::from_amplitudes(
            1,
            vec![
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(0.0, FRAC_1_SQRT_2),
            ],
        )
        .unwrap();
        let set = measure_branches(&plus_i, &[0], Basis::Y).unwrap();
        assert_eq!(set.branches.len(), 1);
        assert_eq!(set.branches[0].outcomes, vec![0]);
    }

    #[test]
    fn empty_target_list_is_an_error() {
        let b = bell_state((0, 0));
        assert!(matches!(
            measure_branches(&b, &[], Basis::X),
            Err(Error::EmptyTargets)
        ));
    }
}
