use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::qsim::density::DensityOperator;
use crate::{tol, Error, Result};

/// Eigenvalues of a Hermitian matrix, as reals.
///
/// Matrices that are diagonal within numerical noise short-circuit to their
/// diagonal; everything else goes through a dense Hermitian
/// eigendecomposition.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let scale = m
        .iter()
        .map(|e| e.norm())
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let mut max_off = 0.0_f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r != c {
                max_off = max_off.max(m[(r, c)].norm());
            }
        }
    }
    if max_off <= 1e-14 * scale {
        return m.diagonal().iter().map(|d| d.re).collect();
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// Shannon entropy in bits of a probability vector. Entries below the
/// entropy cutoff contribute 0.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > tol::EIG_CUTOFF)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy `S(rho)` in bits. Eigenvalues below 1e-12 are
/// treated as exactly 0.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    shannon_entropy(&hermitian_eigenvalues(rho.matrix()))
}

/// One labelled ensemble member.
#[derive(Clone, Debug)]
pub struct EnsembleEntry {
    pub prior: f64,
    pub label: Vec<u8>,
    pub state: DensityOperator,
}

/// A `{prior, label, state}` family, e.g. a party's view of the protocol
/// conditioned on the secret it is trying to learn.
#[derive(Clone, Debug)]
pub struct StateEnsemble {
    pub entries: Vec<EnsembleEntry>,
}

impl StateEnsemble {
    pub fn new(entries: Vec<EnsembleEntry>) -> Result<Self> {
        let e = Self { entries };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::InvalidEnsemble("empty".into()));
        }
        let dim = self.entries[0].state.dim();
        let mut total = 0.0;
        for entry in &self.entries {
            if entry.prior < -tol::PROB {
                return Err(Error::InvalidEnsemble(format!(
                    "negative prior {}",
                    entry.prior
                )));
            }
            if entry.state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: entry.state.dim(),
                    right: dim,
                });
            }
            total += entry.prior;
        }
        if (total - 1.0).abs() > tol::PROB {
            return Err(Error::InvalidEnsemble(format!(
                "priors sum to {total}, not 1"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.entries[0].state.dim()
    }

    pub fn num_qubits(&self) -> usize {
        self.entries[0].state.num_qubits()
    }

    /// The prior-weighted average state.
    pub fn average_state(&self) -> DensityOperator {
        let dim = self.dim();
        let mut acc = DMatrix::from_element(dim, dim, Complex64::ZERO);
        for e in &self.entries {
            acc += e.state.matrix().scale(e.prior);
        }
        DensityOperator::from_matrix_unchecked(self.num_qubits(), acc)
    }

    /// Shannon entropy of the label prior, in bits.
    pub fn label_entropy(&self) -> f64 {
        shannon_entropy(&self.entries.iter().map(|e| e.prior).collect::<Vec<_>>())
    }
}

/// Holevo information `S(avg) - sum_i p_i S(rho_i)` in bits, clipped to be
/// nonnegative. Upper-bounds the classical information any measurement can
/// extract about the label.
pub fn holevo_information(ensemble: &StateEnsemble) -> Result<f64> {
    ensemble.validate()?;
    let avg_entropy = von_neumann_entropy(&ensemble.average_state());
    let cond: f64 = ensemble
        .entries
        .iter()
        .map(|e| e.prior * von_neumann_entropy(&e.state))
        .sum();
    Ok((avg_entropy - cond).max(0.0))
}

/// A positive-operator-valued measure: effects are PSD within 1e-10 and sum
/// to the identity within 1e-10.
#[derive(Clone, Debug)]
pub struct Povm {
    pub effects: Vec<DMatrix<Complex64>>,
}

impl Povm {
    pub fn new(effects: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let p = Self { effects };
        p.validate()?;
        Ok(p)
    }

    /// Projective measurement in the computational basis of `num_qubits`.
    pub fn computational_basis(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let effects = (0..dim)
            .map(|i| {
                let mut m = DMatrix::from_element(dim, dim, Complex64::ZERO);
                m[(i, i)] = Complex64::ONE;
                m
            })
            .collect();
        Self { effects }
    }

    pub fn validate(&self) -> Result<()> {
        if self.effects.is_empty() {
            return Err(Error::InvalidPovm("no effects".into()));
        }
        let dim = self.effects[0].nrows();
        let mut sum = DMatrix::from_element(dim, dim, Complex64::ZERO);
        for e in &self.effects {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::InvalidPovm("effect dimension mismatch".into()));
            }
            let min = hermitian_eigenvalues(e)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if min < -tol::POVM {
                return Err(Error::InvalidPovm(format!(
                    "effect has negative eigenvalue {min:.3e}"
                )));
            }
            sum += e;
        }
        for r in 0..dim {
            for c in 0..dim {
                let want = if r == c { 1.0 } else { 0.0 };
                if (sum[(r, c)] - Complex64::new(want, 0.0)).norm() > tol::POVM {
                    return Err(Error::InvalidPovm(
                        "effects do not sum to the identity".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }
}

/// Classical mutual information in bits between the ensemble label and the
/// POVM outcome, under `p(o|label) = tr(E_o rho_label)`.
pub fn measured_mutual_information(ensemble: &StateEnsemble, povm: &Povm) -> Result<f64> {
    ensemble.validate()?;
    povm.validate()?;
    if povm.dim() != ensemble.dim() {
        return Err(Error::DimensionMismatch {
            left: povm.dim(),
            right: ensemble.dim(),
        });
    }
    let conditionals: Vec<Vec<f64>> = ensemble
        .entries
        .iter()
        .map(|entry| {
            povm.effects
                .iter()
                .map(|e| entry.state.expectation(e).map(|p| p.max(0.0)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let priors: Vec<f64> = ensemble.entries.iter().map(|e| e.prior).collect();
    Ok(mutual_information(&priors, &conditionals))
}

/// Same quantity for the computational-basis measurement, computed from the
/// diagonals so it stays tractable for larger registers. Agrees with
/// [`measured_mutual_information`] under [`Povm::computational_basis`].
pub fn measured_mutual_information_computational(ensemble: &StateEnsemble) -> Result<f64> {
    ensemble.validate()?;
    let conditionals: Vec<Vec<f64>> = ensemble
        .entries
        .iter()
        .map(|e| {
            e.state
                .matrix()
                .diagonal()
                .iter()
                .map(|d| d.re.max(0.0))
                .collect()
        })
        .collect();
    let priors: Vec<f64> = ensemble.entries.iter().map(|e| e.prior).collect();
    Ok(mutual_information(&priors, &conditionals))
}

/// `I(label; outcome) = H(outcome) - H(outcome | label)`, clipped to >= 0.
pub fn mutual_information(priors: &[f64], conditionals: &[Vec<f64>]) -> f64 {
    let outcomes = conditionals.iter().map(Vec::len).max().unwrap_or(0);
    let mut marginal = vec![0.0; outcomes];
    let mut cond_entropy = 0.0;
    for (p, row) in priors.iter().zip(conditionals) {
        for (o, q) in row.iter().enumerate() {
            marginal[o] += p * q;
        }
        cond_entropy += p * shannon_entropy(row);
    }
    (shannon_entropy(&marginal) - cond_entropy).max(0.0)
}
