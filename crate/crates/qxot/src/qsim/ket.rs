use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::qsim::gate::{Gate, GateSpec};
use crate::{tol, Error, Result, MAX_QUBITS};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A pure state on a small register, stored as a dense amplitude vector.
///
/// Qubit 0 is the most significant bit of the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl Ket {
    /// The all-zeros computational basis state on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::computational(num_qubits, 0)
    }

    /// The computational basis state `|index>`.
    pub fn computational(num_qubits: usize, index: usize) -> Result<Self> {
        check_register(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::OutOfRange {
                what: format!("basis index on {num_qubits} qubits"),
                value: index as u64,
            });
        }
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index] = Complex64::ONE;
        Ok(Self { num_qubits, amps })
    }

    /// Builds a state from raw amplitudes, validating length and norm.
    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_register(num_qubits)?;
        if amps.len() != 1usize << num_qubits {
            return Err(Error::BadAmplitudeLength {
                len: amps.len(),
                num_qubits,
            });
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(norm_sq.sqrt()));
        }
        let mut ket = Self { num_qubits, amps };
        ket.renormalize();
        Ok(ket)
    }

    /// Builds an unnormalized vector and normalizes it. Errors on (near-)zero
    /// input.
    pub fn from_unnormalized(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_register(num_qubits)?;
        if amps.len() != 1usize << num_qubits {
            return Err(Error::BadAmplitudeLength {
                len: amps.len(),
                num_qubits,
            });
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq < 1e-20 {
            return Err(Error::NotNormalized(0.0));
        }
        let mut ket = Self { num_qubits, amps };
        ket.renormalize();
        Ok(ket)
    }

    /// Single-qubit `|0>` or `|1>`.
    pub fn basis_bit(bit: u8) -> Self {
        Self::computational(1, bit as usize).expect("single qubit")
    }

    /// Single-qubit `(|0> + (-1)^sign |1>)/sqrt(2)`.
    pub fn plus_minus(sign: u8) -> Self {
        let s = if sign & 1 == 1 { -1.0 } else { 1.0 };
        Self {
            num_qubits: 1,
            amps: vec![
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(s * FRAC_1_SQRT_2, 0.0),
            ],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn renormalize(&mut self) {
        let n = self.norm();
        if (n - 1.0).abs() > f64::EPSILON {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    /// Tensor product `self (x) other`, `self` occupying the high qubits.
    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        check_register(self.num_qubits + other.num_qubits)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Ket {
            num_qubits: self.num_qubits + other.num_qubits,
            amps,
        })
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2`; the global-phase-insensitive state comparison.
    pub fn fidelity(&self, other: &Ket) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Applies a gate, returning the new state. Norm is preserved.
    pub fn apply(&self, spec: &GateSpec) -> Result<Ket> {
        let mut next = self.clone();
        next.apply_mut(spec)?;
        Ok(next)
    }

    /// In-place gate application.
    pub fn apply_mut(&mut self, spec: &GateSpec) -> Result<()> {
        spec.check_targets(self.num_qubits)?;
        match spec.gate {
            Gate::Cnot => self.apply_cnot(spec.targets()[0], spec.targets()[1]),
            Gate::Cz => self.apply_cz(spec.targets()[0], spec.targets()[1]),
            g => {
                let m = g
                    .single_qubit_matrix()
                    .expect("arity was checked; remaining gates are single-qubit");
                self.apply_single(spec.targets()[0], &m);
            }
        }
        Ok(())
    }

    /// Applies a sequence of gates in order.
    pub fn apply_all(&self, gates: &[GateSpec]) -> Result<Ket> {
        let mut state = self.clone();
        for g in gates {
            state.apply_mut(g)?;
        }
        Ok(state)
    }

    fn bit_mask(&self, qubit: usize) -> usize {
        1usize << (self.num_qubits - 1 - qubit)
    }

    fn apply_single(&mut self, qubit: usize, m: &[[Complex64; 2]; 2]) {
        let mask = self.bit_mask(qubit);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cm = self.bit_mask(control);
        let tm = self.bit_mask(target);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        let am = self.bit_mask(a);
        let bm = self.bit_mask(b);
        for i in 0..self.amps.len() {
            if i & am != 0 && i & bm != 0 {
                self.amps[i] = -self.amps[i];
            }
        }
    }

    /// Removes a qubit known to be in the computational state `bit`
    /// (e.g. after a projective measurement). Errors if the qubit still
    /// carries weight on the other value.
    pub fn factor_out(&self, qubit: usize, bit: u8) -> Result<Ket> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        let mask = self.bit_mask(qubit);
        let want = if bit & 1 == 1 { mask } else { 0 };
        let mut stray = 0.0;
        let mut amps = Vec::with_capacity(self.dim() / 2);
        for (i, a) in self.amps.iter().enumerate() {
            if i & mask == want {
                amps.push(*a);
            } else {
                stray += a.norm_sqr();
            }
        }
        if stray > tol::SUBSPACE {
            return Err(Error::OutsideSubspace(stray));
        }
        Ket::from_unnormalized(self.num_qubits - 1, amps)
    }

    /// Moves a qubit from position `from` to position `to`, shifting the
    /// qubits in between.
    pub fn move_qubit(&self, from: usize, to: usize) -> Result<Ket> {
        for q in [from, to] {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if from == to {
            return Ok(self.clone());
        }
        let n = self.num_qubits;
        let mut order: Vec<usize> = (0..n).collect();
        let q = order.remove(from);
        order.insert(to, q);
        // order[new_pos] = old_pos
        let mut amps = vec![Complex64::ZERO; self.dim()];
        for (i, a) in self.amps.iter().enumerate() {
            let mut j = 0usize;
            for (new_pos, &old_pos) in order.iter().enumerate() {
                let bit = (i >> (n - 1 - old_pos)) & 1;
                j |= bit << (n - 1 - new_pos);
            }
            amps[j] = *a;
        }
        Ok(Ket {
            num_qubits: n,
            amps,
        })
    }
}

fn check_register(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits(num_qubits));
    }
    Ok(())
}

/// The four Bell states on two qubits, indexed by a two-bit code.
///
/// Codes `(0,0), (0,1), (1,0), (1,1)` map to `(|01>+|10>)/sqrt(2)`,
/// `(|01>-|10>)/sqrt(2)`, `(|00>+|11>)/sqrt(2)`, `(|00>-|11>)/sqrt(2)`.
pub fn bell_state(code: (u8, u8)) -> Ket {
    let (c1, c2) = (code.0 & 1, code.1 & 1);
    let sign = if c2 == 1 { -1.0 } else { 1.0 };
    let mut amps = vec![Complex64::ZERO; 4];
    if c1 == 0 {
        amps[0b01] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[0b10] = Complex64::new(sign * FRAC_1_SQRT_2, 0.0);
    } else {
        amps[0b00] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[0b11] = Complex64::new(sign * FRAC_1_SQRT_2, 0.0);
    }
    Ket {
        num_qubits: 2,
        amps,
    }
}

impl Serialize for Ket {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            num_qubits: usize,
            amplitudes: Vec<[f64; 2]>,
        }
        Repr {
            num_qubits: self.num_qubits,
            amplitudes: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Ket {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            num_qubits: usize,
            amplitudes: Vec<[f64; 2]>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let amps = repr
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        Ket::from_amplitudes(repr.num_qubits, amps).map_err(D::Error::custom)
    }
}
