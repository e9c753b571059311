//! Interactive two-party evaluation of Clifford+T circuits.
//!
//! Alice teleports her input qubits to Bob, who applies a Clifford
//! subcircuit followed by T gate(s) and teleports the T-touched qubits
//! back. Teleportation leaves `X^a Z^b` byproduct masks whose exponents
//! only Alice knows; Bob transports the masks through his Clifford gates as
//! GF(2) linear forms over her mask variables. A T gate on an X-masked
//! qubit needs a conditional `P^dag` correction, and whether to apply it is
//! exactly a linear polynomial in Alice's mask bits with Bob's
//! coefficients, so both parties evaluate it with the linear-evaluation
//! protocol and Alice corrects her qubit without Bob learning her masks.
//! The cycle repeats per stage; at the end Bob teleports the remaining
//! qubits over, discloses the final frame coefficients, and Alice strips
//! the masks.
//!
//! Both parties live in one global statevector; the two-party boundary is
//! the transcript discipline recorded in the run log.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linear::{inner_product, p3_bob_instance_branches, p3_decode, p3_prepare};
use crate::qsim::{bell_state, measure_branches, Basis, Branch, BranchSet, Gate, GateSpec, Ket};
use crate::xot::XotVariant;
use crate::{Error, Result, MAX_QUBITS};

/// A GF(2) affine form over Alice's mask variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearForm {
    pub coeffs: Vec<u8>,
    pub constant: u8,
}

impl LinearForm {
    pub fn zero(len: usize) -> Self {
        Self {
            coeffs: vec![0; len],
            constant: 0,
        }
    }

    pub fn variable(index: usize, len: usize) -> Self {
        let mut f = Self::zero(len);
        f.coeffs[index] = 1;
        f
    }

    pub fn ensure_len(&mut self, len: usize) {
        if self.coeffs.len() < len {
            self.coeffs.resize(len, 0);
        }
    }

    pub fn xor_assign(&mut self, other: &LinearForm) {
        self.ensure_len(other.coeffs.len());
        for (i, &c) in other.coeffs.iter().enumerate() {
            self.coeffs[i] ^= c;
        }
        self.constant ^= other.constant;
    }

    /// Evaluates the form; missing trailing values count as 0.
    pub fn eval(&self, values: &[u8]) -> u8 {
        let dot = self
            .coeffs
            .iter()
            .zip(values)
            .fold(0u8, |acc, (c, v)| acc ^ (c & v));
        dot ^ self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0 && self.coeffs.iter().all(|&c| c == 0)
    }
}

/// Per-qubit X and Z mask forms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicMask {
    pub x_form: LinearForm,
    pub z_form: LinearForm,
}

/// The frame for a whole register plus the mask-variable count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskFrame {
    pub masks: Vec<SymbolicMask>,
    pub num_vars: usize,
}

impl MaskFrame {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            masks: vec![SymbolicMask::default(); num_qubits],
            num_vars: 0,
        }
    }

    /// Registers a fresh mask variable and returns its index.
    pub fn add_variable(&mut self) -> usize {
        let idx = self.num_vars;
        self.num_vars += 1;
        for m in &mut self.masks {
            m.x_form.ensure_len(self.num_vars);
            m.z_form.ensure_len(self.num_vars);
        }
        idx
    }
}

/// Alice's private values for the mask variables, in index order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskAssignment {
    pub values: Vec<u8>,
}

/// One stage: a Clifford subcircuit followed by T gate(s) on distinct
/// qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub cliffords: Vec<GateSpec>,
    pub t_targets: Vec<usize>,
}

/// A staged Clifford+T circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliffordTCircuit {
    pub num_qubits: usize,
    pub stages: Vec<Stage>,
}

impl CliffordTCircuit {
    pub fn new(num_qubits: usize, stages: Vec<Stage>) -> Result<Self> {
        let c = Self { num_qubits, stages };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::InvalidCircuit("no qubits".into()));
        }
        for stage in &self.stages {
            for g in &stage.cliffords {
                if !g.gate.is_clifford() {
                    return Err(Error::NonClifford(g.gate.to_string()));
                }
                g.check_targets(self.num_qubits)?;
            }
            for (i, &t) in stage.t_targets.iter().enumerate() {
                if t >= self.num_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: t,
                        num_qubits: self.num_qubits,
                    });
                }
                if stage.t_targets[..i].contains(&t) {
                    return Err(Error::InvalidCircuit(format!(
                        "duplicate T target {t} within a stage"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn t_count(&self) -> usize {
        self.stages.iter().map(|s| s.t_targets.len()).sum()
    }

    /// All gates in execution order, T gates included.
    pub fn gates_in_order(&self) -> Vec<GateSpec> {
        let mut out = Vec::new();
        for stage in &self.stages {
            out.extend(stage.cliffords.iter().cloned());
            for &t in &stage.t_targets {
                out.push(GateSpec::new(Gate::T, vec![t]).expect("validated target"));
            }
        }
        out
    }

    /// Parses the text format: one gate per line (`H 0`, `CNOT 0 1`,
    /// `T 2`), stages separated by `---`, `#` comments allowed. The qubit
    /// count is inferred from the largest target.
    pub fn parse(text: &str) -> Result<Self> {
        let mut stages = Vec::new();
        let mut cliffords = Vec::new();
        let mut t_targets: Vec<usize> = Vec::new();
        let mut max_target = 0usize;
        let flush =
            |cliffords: &mut Vec<GateSpec>, t_targets: &mut Vec<usize>, stages: &mut Vec<Stage>| {
                if !cliffords.is_empty() || !t_targets.is_empty() {
                    stages.push(Stage {
                        cliffords: std::mem::take(cliffords),
                        t_targets: std::mem::take(t_targets),
                    });
                }
            };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line == "---" {
                flush(&mut cliffords, &mut t_targets, &mut stages);
                continue;
            }
            let mut parts = line.split_whitespace();
            let name = parts.next().unwrap().to_ascii_uppercase();
            let targets: Vec<usize> = parts
                .map(|p| {
                    p.parse::<usize>().map_err(|_| {
                        Error::InvalidCircuit(format!("line {}: bad target '{p}'", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            for &t in &targets {
                max_target = max_target.max(t);
            }
            let gate = match name.as_str() {
                "I" => Gate::I,
                "X" => Gate::X,
                "Z" => Gate::Z,
                "H" => Gate::H,
                "P" | "S" => Gate::P,
                "PDAG" | "SDAG" => Gate::Pdag,
                "T" => Gate::T,
                "CNOT" | "CX" => Gate::Cnot,
                "CZ" => Gate::Cz,
                other => {
                    return Err(Error::InvalidCircuit(format!(
                        "line {}: unknown gate '{other}'",
                        lineno + 1
                    )))
                }
            };
            if gate == Gate::T {
                if targets.len() != 1 {
                    return Err(Error::InvalidCircuit(format!(
                        "line {}: T takes one target",
                        lineno + 1
                    )));
                }
                t_targets.push(targets[0]);
            } else {
                if !t_targets.is_empty() {
                    return Err(Error::InvalidCircuit(format!(
                        "line {}: Clifford gate after T within a stage",
                        lineno + 1
                    )));
                }
                cliffords.push(GateSpec::new(gate, targets)?);
            }
        }
        flush(&mut cliffords, &mut t_targets, &mut stages);
        if stages.is_empty() {
            return Err(Error::InvalidCircuit("empty circuit".into()));
        }
        Self::new(max_target + 1, stages)
    }
}

impl std::fmt::Display for CliffordTCircuit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, stage) in self.stages.iter().enumerate() {
            if i > 0 {
                writeln!(f, "---")?;
            }
            for g in &stage.cliffords {
                writeln!(f, "{g}")?;
            }
            for &t in &stage.t_targets {
                writeln!(f, "T {t}")?;
            }
        }
        Ok(())
    }
}

/// Plain application of the whole circuit; the correctness oracle.
pub fn direct_eval(circuit: &CliffordTCircuit, input: &Ket) -> Result<Ket> {
    if input.num_qubits() != circuit.num_qubits {
        return Err(Error::DimensionMismatch {
            left: input.num_qubits(),
            right: circuit.num_qubits,
        });
    }
    input.apply_all(&circuit.gates_in_order())
}

/// Enumerates the four branches of teleporting `qubit` through a fresh Bell
/// pair. Each branch is equiprobable; in branch `(a, b)` the receiving
/// qubit (returned in the teleported position) holds `X^a Z^b` times the
/// original qubit state, up to global phase.
pub fn teleport_branches(state: &Ket, qubit: usize) -> Result<BranchSet> {
    let n = state.num_qubits();
    if qubit >= n {
        return Err(Error::QubitOutOfRange {
            index: qubit,
            num_qubits: n,
        });
    }
    if n + 2 > MAX_QUBITS {
        return Err(Error::TooManyQubits(n + 2));
    }
    // Ancilla pair in (|00> + |11>)/sqrt(2); anc1 at index n, anc2 at n+1.
    let mut s = state.tensor(&bell_state((1, 0)))?;
    s.apply_mut(&GateSpec::new(Gate::Cnot, vec![qubit, n])?)?;
    s.apply_mut(&GateSpec::new(Gate::H, vec![qubit])?)?;
    let measured = measure_branches(&s, &[qubit, n], Basis::Z)?;
    let mut branches = Vec::with_capacity(4);
    for br in measured.branches {
        let (m1, m2) = (br.outcomes[0], br.outcomes[1]);
        // Collapse the measured qubits out and move the receiver back into
        // the teleported slot. Receiver holds Z^{m1} X^{m2} psi, i.e.
        // (a, b) = (m2, m1) in X-before-Z convention.
        let post = br
            .post_state
            .factor_out(qubit, m1)?
            .factor_out(n - 1, m2)?
            .move_qubit(n - 1, qubit)?;
        branches.push(Branch {
            outcomes: vec![m2, m1],
            probability: br.probability,
            post_state: post,
        });
    }
    Ok(BranchSet { branches })
}

/// Rewrites the mask forms through one Clifford stage.
///
/// Conjugation rules over GF(2), phases dropped: H swaps the X and Z forms;
/// P and Pdag add the X form into the Z form; CNOT adds control-X into
/// target-X and target-Z into control-Z; CZ cross-adds X forms into Z
/// forms; I, X and Z leave the forms unchanged (Pauli conjugation only
/// introduces signs).
pub fn clifford_mask_transport(gates: &[GateSpec], frame: &mut MaskFrame) -> Result<()> {
    for g in gates {
        if !g.gate.is_clifford() {
            return Err(Error::NonClifford(g.gate.to_string()));
        }
        let t = g.targets();
        match g.gate {
            Gate::I | Gate::X | Gate::Z => {}
            Gate::H => {
                let m = &mut frame.masks[t[0]];
                std::mem::swap(&mut m.x_form, &mut m.z_form);
            }
            Gate::P | Gate::Pdag => {
                let x = frame.masks[t[0]].x_form.clone();
                frame.masks[t[0]].z_form.xor_assign(&x);
            }
            Gate::Cnot => {
                let xc = frame.masks[t[0]].x_form.clone();
                frame.masks[t[1]].x_form.xor_assign(&xc);
                let zt = frame.masks[t[1]].z_form.clone();
                frame.masks[t[0]].z_form.xor_assign(&zt);
            }
            Gate::Cz => {
                let xa = frame.masks[t[0]].x_form.clone();
                let xb = frame.masks[t[1]].x_form.clone();
                frame.masks[t[0]].z_form.xor_assign(&xb);
                frame.masks[t[1]].z_form.xor_assign(&xa);
            }
            Gate::T | Gate::Tdag | Gate::Rz(_) => unreachable!("checked above"),
        }
    }
    Ok(())
}

/// The correction form for a T gate: the qubit's X-mask form. Evaluating it
/// over Alice's mask values yields the bit deciding the `P^dag` correction,
/// because `T (X^a Z^b |psi>) = X^a Z^{a XOR b} P^a (T |psi>)` up to global
/// phase.
pub fn t_correction_coeffs(x_form: &LinearForm) -> LinearForm {
    x_form.clone()
}

/// Options for the interactive runner.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Evaluate all correction forms of a stage with one shared Bob key
    /// `k0` instead of a fresh key per T gate.
    pub batch_corrections: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TeleportLog {
    pub direction: String,
    pub qubit: usize,
    pub mask_bits: (u8, u8),
    /// Indices of the new mask variables for Alice-to-Bob teleports; Bob's
    /// own outcomes fold into form constants instead.
    pub new_variables: Option<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct P3CallLog {
    pub stage: usize,
    pub qubit: usize,
    pub instances: usize,
    pub coefficients: Vec<u8>,
    pub constant: u8,
    pub evaluation: u8,
    pub correction_applied: bool,
    pub shared_k0: bool,
}

/// Complete record of one interactive run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunLog {
    pub seed: u64,
    pub num_qubits: usize,
    pub num_stages: usize,
    pub teleports: Vec<TeleportLog>,
    pub p3_calls: Vec<P3CallLog>,
    /// Final frame forms Bob disclosed so Alice could unmask the output.
    /// This disclosure is an implementation choice surfaced for audit.
    pub final_forms: Vec<SymbolicMask>,
    pub warnings: Vec<String>,
    pub fidelity: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Holder {
    Alice,
    Bob,
}

/// Runs the interactive protocol end to end on one sampled branch path and
/// checks the unmasked output against [`direct_eval`].
pub fn run_interactive(
    input: &Ket,
    circuit: &CliffordTCircuit,
    seed: u64,
    options: RunOptions,
) -> Result<(Ket, RunLog)> {
    circuit.validate()?;
    if input.num_qubits() != circuit.num_qubits {
        return Err(Error::DimensionMismatch {
            left: input.num_qubits(),
            right: circuit.num_qubits,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = circuit.num_qubits;
    let mut physical = input.clone();
    let mut frame = MaskFrame::new(n);
    let mut values = MaskAssignment::default();
    let mut holder = vec![Holder::Alice; n];
    let mut log = RunLog {
        seed,
        num_qubits: n,
        num_stages: circuit.stages.len(),
        teleports: Vec::new(),
        p3_calls: Vec::new(),
        final_forms: Vec::new(),
        warnings: Vec::new(),
        fidelity: 0.0,
    };

    let teleport_to_bob = |physical: &mut Ket,
                               frame: &mut MaskFrame,
                               values: &mut MaskAssignment,
                               holder: &mut Vec<Holder>,
                               log: &mut RunLog,
                               rng: &mut ChaCha8Rng,
                               q: usize|
     -> Result<()> {
        let branch = {
            let set = teleport_branches(physical, q)?;
            set.sample(rng).clone()
        };
        let (a, b) = (branch.outcomes[0], branch.outcomes[1]);
        *physical = branch.post_state;
        let ia = frame.add_variable();
        values.values.push(a);
        let ib = frame.add_variable();
        values.values.push(b);
        frame.masks[q]
            .x_form
            .xor_assign(&LinearForm::variable(ia, frame.num_vars));
        frame.masks[q]
            .z_form
            .xor_assign(&LinearForm::variable(ib, frame.num_vars));
        holder[q] = Holder::Bob;
        log.teleports.push(TeleportLog {
            direction: "alice_to_bob".into(),
            qubit: q,
            mask_bits: (a, b),
            new_variables: Some((ia, ib)),
        });
        Ok(())
    };

    // Alice teleports the whole input register to Bob.
    for q in 0..n {
        teleport_to_bob(
            &mut physical,
            &mut frame,
            &mut values,
            &mut holder,
            &mut log,
            &mut rng,
            q,
        )?;
    }

    for (stage_idx, stage) in circuit.stages.iter().enumerate() {
        // Any qubit Alice still holds from the previous stage's
        // corrections goes back to Bob first.
        for q in 0..n {
            if holder[q] == Holder::Alice {
                teleport_to_bob(
                    &mut physical,
                    &mut frame,
                    &mut values,
                    &mut holder,
                    &mut log,
                    &mut rng,
                    q,
                )?;
            }
        }

        // Bob applies the Clifford subcircuit and transports the frame.
        physical = physical.apply_all(&stage.cliffords)?;
        clifford_mask_transport(&stage.cliffords, &mut frame)?;

        let shared_k0: Option<u8> = if options.batch_corrections {
            Some(rng.gen_range(0..2))
        } else {
            None
        };
        for &q in &stage.t_targets {
            // Bob applies T; the X mask now owes a P^dag correction.
            physical.apply_mut(&GateSpec::new(Gate::T, vec![q])?)?;
            let x_t = frame.masks[q].x_form.clone();
            frame.masks[q].z_form.xor_assign(&x_t);

            // Bob teleports the qubit to Alice; his outcomes are constants
            // only he knows, folded into the forms he tracks.
            let branch = {
                let set = teleport_branches(&physical, q)?;
                set.sample(&mut rng).clone()
            };
            let (c, d) = (branch.outcomes[0], branch.outcomes[1]);
            physical = branch.post_state;
            holder[q] = Holder::Alice;
            log.teleports.push(TeleportLog {
                direction: "bob_to_alice".into(),
                qubit: q,
                mask_bits: (c, d),
                new_variables: None,
            });

            // Joint evaluation of the correction form.
            let correction_form = t_correction_coeffs(&x_t);
            let (evaluation, instances) = evaluate_form_via_p3(
                &values.values,
                &correction_form,
                shared_k0,
                &mut rng,
            )?;
            let correction = evaluation ^ correction_form.constant;
            if correction == 1 {
                physical.apply_mut(&GateSpec::new(Gate::Pdag, vec![q])?)?;
            }
            log.p3_calls.push(P3CallLog {
                stage: stage_idx,
                qubit: q,
                instances,
                coefficients: correction_form.coeffs.clone(),
                constant: correction_form.constant,
                evaluation,
                correction_applied: correction == 1,
                shared_k0: shared_k0.is_some(),
            });

            // Frame after teleport + correction:
            // x -> x + c, z -> z + d + c*x (all relative to the form at T
            // time; the T-time z update above already added x, so the
            // remaining adjustment is x when c = 0 and nothing when c = 1).
            frame.masks[q].x_form.constant ^= c;
            if c == 0 {
                frame.masks[q].z_form.xor_assign(&x_t);
            }
            frame.masks[q].z_form.constant ^= d;
        }
    }

    // Bob teleports whatever he still holds back to Alice.
    for (q, held) in holder.iter_mut().enumerate() {
        if *held == Holder::Bob {
            let branch = {
                let set = teleport_branches(&physical, q)?;
                set.sample(&mut rng).clone()
            };
            let (c, d) = (branch.outcomes[0], branch.outcomes[1]);
            physical = branch.post_state;
            frame.masks[q].x_form.constant ^= c;
            frame.masks[q].z_form.constant ^= d;
            *held = Holder::Alice;
            log.teleports.push(TeleportLog {
                direction: "bob_to_alice".into(),
                qubit: q,
                mask_bits: (c, d),
                new_variables: None,
            });
        }
    }

    // Bob disclosed the end-of-circuit frame; Alice evaluates and strips
    // the residual Pauli masks. The inverse of X^x Z^z is applied as X
    // then Z.
    log.final_forms = frame.masks.clone();
    for q in 0..n {
        let x_val = frame.masks[q].x_form.eval(&values.values);
        let z_val = frame.masks[q].z_form.eval(&values.values);
        if x_val == 1 {
            physical.apply_mut(&GateSpec::new(Gate::X, vec![q])?)?;
        }
        if z_val == 1 {
            physical.apply_mut(&GateSpec::new(Gate::Z, vec![q])?)?;
        }
    }

    let expected = direct_eval(circuit, input)?;
    log.fidelity = physical.fidelity(&expected);
    if log.fidelity < 1.0 - 1e-9 {
        return Err(Error::InternalCheck(format!(
            "interactive run fidelity {} against direct evaluation",
            log.fidelity
        )));
    }
    Ok((physical, log))
}

/// One linear-evaluation call: Alice's input is her mask values (padded to
/// even length), Bob's input is the coefficient vector, and both check the
/// decoded bit against the plaintext shadow. Returns `(bit, instances)`.
fn evaluate_form_via_p3<R: Rng + ?Sized>(
    values: &[u8],
    form: &LinearForm,
    shared_k0: Option<u8>,
    rng: &mut R,
) -> Result<(u8, usize)> {
    let mut x_vec = values.to_vec();
    let mut y_vec = form.coeffs.clone();
    y_vec.resize(x_vec.len(), 0);
    if x_vec.len() % 2 == 1 {
        x_vec.push(0);
        y_vec.push(0);
    }
    let (alice, states) = p3_prepare(&x_vec, XotVariant::P1, rng)?;
    let k0 = shared_k0.unwrap_or_else(|| rng.gen_range(0..2));
    let mut outcomes = Vec::with_capacity(3 * states.len());
    for (i, state) in states.iter().enumerate() {
        let k1 = rng.gen_range(0..2);
        let branches = p3_bob_instance_branches(
            state,
            (y_vec[2 * i], y_vec[2 * i + 1]),
            XotVariant::P1,
            k0,
            k1,
        )?;
        outcomes.extend(branches.sample(rng).outcomes.clone());
    }
    let decode = p3_decode(&x_vec, &alice, &outcomes)?;
    let shadow = inner_product(&x_vec, &y_vec);
    if decode.output != shadow {
        return Err(Error::InternalCheck(format!(
            "correction evaluation {} disagrees with plaintext shadow {shadow}",
            decode.output
        )));
    }
    Ok((decode.output, states.len()))
}

/// Generates a random staged circuit for randomized verification.
pub fn random_circuit<R: Rng + ?Sized>(
    num_qubits: usize,
    num_stages: usize,
    cliffords_per_stage: usize,
    max_t_per_stage: usize,
    rng: &mut R,
) -> CliffordTCircuit {
    let mut stages = Vec::with_capacity(num_stages);
    for _ in 0..num_stages {
        let mut cliffords = Vec::with_capacity(cliffords_per_stage);
        for _ in 0..cliffords_per_stage {
            let choice = rng.gen_range(0..7);
            let g = match choice {
                0 => Gate::H,
                1 => Gate::P,
                2 => Gate::Pdag,
                3 => Gate::X,
                4 => Gate::Z,
                5 => Gate::Cnot,
                _ => Gate::Cz,
            };
            let spec = if g.arity() == 2 && num_qubits >= 2 {
                let a = rng.gen_range(0..num_qubits);
                let mut b = rng.gen_range(0..num_qubits);
                while b == a {
                    b = rng.gen_range(0..num_qubits);
                }
                GateSpec::new(g, vec![a, b])
            } else {
                let g = if g.arity() == 2 { Gate::H } else { g };
                GateSpec::new(g, vec![rng.gen_range(0..num_qubits)])
            };
            cliffords.push(spec.expect("targets are in range and distinct"));
        }
        let t_count = rng.gen_range(0..=max_t_per_stage.min(num_qubits));
        let mut pool: Vec<usize> = (0..num_qubits).collect();
        let mut t_targets = Vec::with_capacity(t_count);
        for _ in 0..t_count {
            let i = rng.gen_range(0..pool.len());
            t_targets.push(pool.swap_remove(i));
        }
        stages.push(Stage {
            cliffords,
            t_targets,
        });
    }
    CliffordTCircuit {
        num_qubits,
        stages,
    }
}

/// Applies the evaluated Pauli frame (X then Z per qubit) to a state;
/// testing helper for the transport oracle.
pub fn apply_frame(state: &Ket, frame: &MaskFrame, values: &[u8]) -> Result<Ket> {
    let mut s = state.clone();
    for (q, mask) in frame.masks.iter().enumerate() {
        if mask.x_form.eval(values) == 1 {
            s.apply_mut(&GateSpec::new(Gate::X, vec![q])?)?;
        }
        if mask.z_form.eval(values) == 1 {
            s.apply_mut(&GateSpec::new(Gate::Z, vec![q])?)?;
        }
    }
    Ok(s)
}
