use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Gate alphabet used by the protocols and the two-party evaluation scheme.
///
/// `Rz(theta) = diag(1, e^{i theta})`, `P = Rz(pi/2)`, `T = Rz(pi/4)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    I,
    X,
    Z,
    H,
    P,
    Pdag,
    T,
    Tdag,
    Rz(f64),
    Cnot,
    Cz,
}

impl Gate {
    /// Number of target qubits the gate acts on.
    pub fn arity(&self) -> usize {
        match self {
            Gate::Cnot | Gate::Cz => 2,
            _ => 1,
        }
    }

    /// True for gates that normalize Pauli operators under conjugation.
    pub fn is_clifford(&self) -> bool {
        !matches!(self, Gate::T | Gate::Tdag | Gate::Rz(_))
    }

    /// The 2x2 matrix of a single-qubit gate; `None` for two-qubit gates.
    pub fn single_qubit_matrix(&self) -> Option<[[Complex64; 2]; 2]> {
        let o = Complex64::ZERO;
        let l = Complex64::ONE;
        let phase = |theta: f64| Complex64::from_polar(1.0, theta);
        let diag = |d: Complex64| [[l, o], [o, d]];
        let m = match self {
            Gate::I => diag(l),
            Gate::X => [[o, l], [l, o]],
            Gate::Z => diag(-l),
            Gate::H => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            Gate::P => diag(Complex64::I),
            Gate::Pdag => diag(-Complex64::I),
            Gate::T => diag(phase(std::f64::consts::FRAC_PI_4)),
            Gate::Tdag => diag(phase(-std::f64::consts::FRAC_PI_4)),
            Gate::Rz(theta) => diag(phase(*theta)),
            Gate::Cnot | Gate::Cz => return None,
        };
        Some(m)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::I => write!(f, "I"),
            Gate::X => write!(f, "X"),
            Gate::Z => write!(f, "Z"),
            Gate::H => write!(f, "H"),
            Gate::P => write!(f, "P"),
            Gate::Pdag => write!(f, "PDAG"),
            Gate::T => write!(f, "T"),
            Gate::Tdag => write!(f, "TDAG"),
            Gate::Rz(theta) => write!(f, "RZ({theta})"),
            Gate::Cnot => write!(f, "CNOT"),
            Gate::Cz => write!(f, "CZ"),
        }
    }
}

/// A gate bound to specific target qubits (0-based indices).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub gate: Gate,
    targets: Vec<usize>,
}

impl GateSpec {
    pub fn new(gate: Gate, targets: Vec<usize>) -> Result<Self> {
        if targets.len() != gate.arity() {
            return Err(Error::GateArity {
                gate: gate.to_string(),
                expected: gate.arity(),
                got: targets.len(),
            });
        }
        for (i, &t) in targets.iter().enumerate() {
            if targets[..i].contains(&t) {
                return Err(Error::DuplicateTarget(t));
            }
        }
        Ok(Self { gate, targets })
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub(crate) fn check_targets(&self, num_qubits: usize) -> Result<()> {
        for &t in &self.targets {
            if t >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: t,
                    num_qubits,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gate)?;
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_qubit_gates_are_unitary() {
        let gates = [
            Gate::I,
            Gate::X,
            Gate::Z,
            Gate::H,
            Gate::P,
            Gate::Pdag,
            Gate::T,
            Gate::Tdag,
            Gate::Rz(0.7),
            Gate::Rz(-2.3),
        ];
        for gate in gates {
            let m = gate.single_qubit_matrix().unwrap();
            // U U^dag = I within 1e-12.
            for r in 0..2 {
                for c in 0..2 {
                    let e: Complex64 = (0..2).map(|k| m[r][k] * m[c][k].conj()).sum();
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!(
                        (e - Complex64::new(want, 0.0)).norm() < 1e-12,
                        "{gate} not unitary"
                    );
                }
            }
        }
    }

    #[test]
    fn arity_and_duplicate_targets_are_rejected() {
        assert!(GateSpec::new(Gate::Cnot, vec![0]).is_err());
        assert!(GateSpec::new(Gate::Cnot, vec![1, 1]).is_err());
        assert!(GateSpec::new(Gate::H, vec![0, 1]).is_err());
        assert!(GateSpec::new(Gate::Cz, vec![0, 2]).is_ok());
    }
}
