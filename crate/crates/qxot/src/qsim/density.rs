use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::qsim::entropy::hermitian_eigenvalues;
use crate::qsim::ket::Ket;
use crate::{tol, Error, Result, MAX_QUBITS};

/// A mixed state on a small register, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    num_qubits: usize,
    mat: DMatrix<Complex64>,
}

impl DensityOperator {
    /// `|psi><psi|` for a pure state.
    pub fn from_ket(psi: &Ket) -> Self {
        let dim = psi.dim();
        let a = psi.amplitudes();
        let mat = DMatrix::from_fn(dim, dim, |r, c| a[r] * a[c].conj());
        Self {
            num_qubits: psi.num_qubits(),
            mat,
        }
    }

    /// Validates Hermiticity, unit trace, and positive semidefiniteness
    /// before accepting the matrix.
    pub fn from_matrix(num_qubits: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(num_qubits));
        }
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                left: mat.nrows(),
                right: dim,
            });
        }
        let rho = Self { num_qubits, mat };
        rho.validate()?;
        Ok(rho)
    }

    /// Accepts a matrix produced by trusted internal arithmetic.
    pub(crate) fn from_matrix_unchecked(num_qubits: usize, mat: DMatrix<Complex64>) -> Self {
        Self { num_qubits, mat }
    }

    /// Checks the density-operator invariants: Hermitian within 1e-12,
    /// trace 1 within 1e-12, eigenvalues >= -1e-10.
    pub fn validate(&self) -> Result<()> {
        let m = &self.mat;
        for r in 0..m.nrows() {
            for c in r..m.ncols() {
                if (m[(r, c)] - m[(c, r)].conj()).norm() > tol::HERMITIAN * 10.0_f64.max(1.0) {
                    return Err(Error::InvalidDensity(format!(
                        "not Hermitian at ({r},{c})"
                    )));
                }
            }
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eigenvalues(m)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -tol::PSD {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    /// The maximally mixed state `I / 2^n`.
    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mat = DMatrix::from_diagonal_element(
            dim,
            dim,
            Complex64::new(1.0 / dim as f64, 0.0),
        );
        Self { num_qubits, mat }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|d| d.re).sum()
    }

    /// `tr(rho^2)`; 1 for pure states.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.mat.nrows() {
            for c in 0..self.mat.ncols() {
                acc += (self.mat[(r, c)] * self.mat[(c, r)]).re;
            }
        }
        acc
    }

    /// `tr(E rho)` for a Hermitian effect `E`.
    pub fn expectation(&self, effect: &DMatrix<Complex64>) -> Result<f64> {
        if effect.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: effect.nrows(),
                right: self.dim(),
            });
        }
        let mut acc = Complex64::ZERO;
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                acc += effect[(r, c)] * self.mat[(c, r)];
            }
        }
        Ok(acc.re)
    }

    /// Partial trace keeping the listed qubits, in the listed order.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityOperator> {
        partial_trace(self.num_qubits, keep, |r, c| self.mat[(r, c)])
    }

    /// Mixes `other` into `self` with the given weight (matrix arithmetic
    /// helper for ensemble construction).
    pub fn scaled_add(&mut self, weight: f64, other: &DensityOperator) {
        self.mat += other.mat.scale(weight);
    }

    pub fn scale(&mut self, weight: f64) {
        self.mat.scale_mut(weight);
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let num_qubits = self.num_qubits + other.num_qubits;
        if num_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(num_qubits));
        }
        Ok(DensityOperator {
            num_qubits,
            mat: self.mat.kronecker(&other.mat),
        })
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_with_pure(&self, psi: &Ket) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: psi.dim(),
                right: self.dim(),
            });
        }
        let a = psi.amplitudes();
        let mut acc = Complex64::ZERO;
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                acc += a[r].conj() * self.mat[(r, c)] * a[c];
            }
        }
        Ok(acc.re)
    }
}

impl Ket {
    /// Partial trace of `|self><self|` keeping the listed qubits.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityOperator> {
        let a = self.amplitudes();
        partial_trace(self.num_qubits(), keep, |r, c| a[r] * a[c].conj())
    }
}

fn partial_trace<F>(num_qubits: usize, keep: &[usize], entry: F) -> Result<DensityOperator>
where
    F: Fn(usize, usize) -> Complex64,
{
    if keep.is_empty() {
        return Err(Error::EmptyTargets);
    }
    for (i, &q) in keep.iter().enumerate() {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits,
            });
        }
        if keep[..i].contains(&q) {
            return Err(Error::DuplicateTarget(q));
        }
    }
    let traced: Vec<usize> = (0..num_qubits).filter(|q| !keep.contains(q)).collect();
    let kd = 1usize << keep.len();
    let td = 1usize << traced.len();
    let pos = |q: usize| num_qubits - 1 - q;

    let expand = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0usize;
        for (j, &q) in keep.iter().enumerate() {
            let bit = (kept_bits >> (keep.len() - 1 - j)) & 1;
            idx |= bit << pos(q);
        }
        for (j, &q) in traced.iter().enumerate() {
            let bit = (traced_bits >> (traced.len().max(1) - 1 - j)) & 1;
            idx |= bit << pos(q);
        }
        idx
    };

    let mut mat = DMatrix::from_element(kd, kd, Complex64::ZERO);
    for r in 0..kd {
        for c in 0..kd {
            let mut acc = Complex64::ZERO;
            for t in 0..td {
                acc += entry(expand(r, t), expand(c, t));
            }
            mat[(r, c)] = acc;
        }
    }
    Ok(DensityOperator {
        num_qubits: keep.len(),
        mat,
    })
}

/// Trace distance `(1/2) ||a - b||_1`, a metric on density operators with
/// values in `[0, 1]`.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let diff = a.matrix() - b.matrix();
    let eigs = hermitian_eigenvalues(&diff);
    Ok(0.5 * eigs.iter().map(|e| e.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::ket::bell_state;

    #[test]
    fn reduce_of_a_bell_pair_is_maximally_mixed() {
        let rho = bell_state((0, 0)).reduce(&[0]).unwrap();
        let mixed = DensityOperator::maximally_mixed(1);
        assert!(trace_distance(&rho, &mixed).unwrap() < 1e-12);
    }

    #[test]
    fn reduce_of_a_product_state_is_pure() {
        let s = Ket::computational(2, 0b00).unwrap();
        let rho = s.reduce(&[0]).unwrap();
        let zero = DensityOperator::from_ket(&Ket::basis_bit(0));
        assert!(trace_distance(&rho, &zero).unwrap() < 1e-12);
        assert!((rho.purity() - 1.0).abs() < tol::PROB);
    }

    #[test]
    fn reduce_keeping_all_qubits_preserves_purity() {
        let s = bell_state((1, 1));
        let rho = s.reduce(&[0, 1]).unwrap();
        assert!((rho.purity() - 1.0).abs() < tol::PROB);
        assert!((rho.trace() - 1.0).abs() < tol::PROB);
    }

    #[test]
    fn trace_distance_basics() {
        let zero = DensityOperator::from_ket(&Ket::basis_bit(0));
        let one = DensityOperator::from_ket(&Ket::basis_bit(1));
        let mixed = DensityOperator::maximally_mixed(1);
        assert!(trace_distance(&zero, &zero).unwrap() < 1e-14);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        // Eigenvalues of I/2 - |0><0| are -1/2 and 1/2.
        assert!((trace_distance(&mixed, &zero).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = DensityOperator::maximally_mixed(1);
        let b = DensityOperator::maximally_mixed(2);
        assert!(trace_distance(&a, &b).is_err());
    }

    #[test]
    fn validate_accepts_proper_states_and_rejects_junk() {
        DensityOperator::from_ket(&bell_state((0, 1)))
            .validate()
            .unwrap();
        let bad = DMatrix::from_diagonal_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(DensityOperator::from_matrix(1, bad).is_err()); // trace 2
    }
}
