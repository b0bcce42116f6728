//! Gate-level circuits, Haar-random sampling, and the named reference
//! circuits: the Hadamard test, the SWAP staircase, and repeated-interaction
//! plans with their unfolding into a single machine-shaped circuit.
//!
//! Gates listed left to right apply first to last, matching circuit-diagram
//! reading order, so `assemble` multiplies right-to-left.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channels::{apply_unitary, partial_trace};
use crate::error::{Error, Result};
use crate::linalg::{checked_dim, ComplexMatrix, UnitaryMatrix};
use crate::registers::{pure_state, DensityMatrix, RegisterLayout};

/// One circuit element. Parameter matrices are carried as
/// [`UnitaryMatrix`] witnesses, so every stored gate is unitary.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    X(usize),
    H(usize),
    S(usize),
    Swap(usize, usize),
    Cnot { control: usize, target: usize },
    /// `U` on `targets` applied when `control` is 1.
    ControlledU {
        control: usize,
        targets: Vec<usize>,
        matrix: UnitaryMatrix,
    },
    Unitary1 { wire: usize, matrix: UnitaryMatrix },
    Unitary2 { wires: [usize; 2], matrix: UnitaryMatrix },
    /// Whole-register unitary.
    Full { matrix: UnitaryMatrix },
}

impl Gate {
    /// Wires the gate touches, in local-significance order (first wire is
    /// the most significant local bit).
    pub fn wires(&self, n: usize) -> Vec<usize> {
        match self {
            Gate::X(w) | Gate::H(w) | Gate::S(w) => vec![*w],
            Gate::Swap(w1, w2) => vec![*w1, *w2],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::ControlledU { control, targets, .. } => {
                let mut all = vec![*control];
                all.extend_from_slice(targets);
                all
            }
            Gate::Unitary1 { wire, .. } => vec![*wire],
            Gate::Unitary2 { wires, .. } => wires.to_vec(),
            Gate::Full { .. } => (0..n).collect(),
        }
    }

    fn local_matrix(&self) -> ComplexMatrix {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match self {
            Gate::X(_) => ComplexMatrix::new(2, 2, vec![zero, one, one, zero]).unwrap(),
            Gate::H(_) => {
                let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                ComplexMatrix::new(2, 2, vec![s, s, s, -s]).unwrap()
            }
            Gate::S(_) => {
                ComplexMatrix::new(2, 2, vec![one, zero, zero, Complex64::new(0.0, 1.0)]).unwrap()
            }
            Gate::Swap(_, _) => {
                let mut m = ComplexMatrix::zeros(4, 4);
                m.set(0, 0, one);
                m.set(1, 2, one);
                m.set(2, 1, one);
                m.set(3, 3, one);
                m
            }
            Gate::Cnot { .. } => {
                let mut m = ComplexMatrix::zeros(4, 4);
                m.set(0, 0, one);
                m.set(1, 1, one);
                m.set(2, 3, one);
                m.set(3, 2, one);
                m
            }
            Gate::ControlledU { matrix, .. } => {
                let k = matrix.dim();
                let mut m = ComplexMatrix::zeros(2 * k, 2 * k);
                for i in 0..k {
                    m.set(i, i, one);
                    for j in 0..k {
                        m.set(k + i, k + j, matrix.entry(i, j));
                    }
                }
                m
            }
            Gate::Unitary1 { matrix, .. }
            | Gate::Unitary2 { matrix, .. }
            | Gate::Full { matrix } => matrix.matrix().clone(),
        }
    }
}

/// Ordered gate list on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCircuit("circuit needs at least one qubit".into()));
        }
        Ok(Self { n, gates: Vec::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Appends a gate, checking wire bounds, distinctness, and parameter
    /// matrix dimensions.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let wires = gate.wires(self.n);
        let mut seen = vec![false; self.n];
        for &w in &wires {
            if w >= self.n {
                return Err(Error::InvalidCircuit(format!(
                    "wire {w} out of range for {} qubits",
                    self.n
                )));
            }
            if seen[w] {
                return Err(Error::InvalidCircuit(format!("wire {w} repeated in gate")));
            }
            seen[w] = true;
        }
        let expected_dim = 1usize << wires.len();
        let ok = match &gate {
            Gate::ControlledU { matrix, targets, .. } => {
                matrix.dim() == (1usize << targets.len())
            }
            Gate::Unitary1 { matrix, .. } => matrix.dim() == 2,
            Gate::Unitary2 { matrix, .. } => matrix.dim() == 4,
            Gate::Full { matrix } => matrix.dim() == expected_dim,
            _ => true,
        };
        if !ok {
            return Err(Error::InvalidCircuit(
                "parameter matrix dimension does not match the gate wires".into(),
            ));
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Concatenation: `self` runs first, then `tail`.
    pub fn concat(&self, tail: &Circuit) -> Result<Circuit> {
        if self.n != tail.n {
            return Err(Error::InvalidCircuit(format!(
                "cannot concatenate circuits on {} and {} qubits",
                self.n, tail.n
            )));
        }
        let mut out = self.clone();
        out.gates.extend(tail.gates.iter().cloned());
        Ok(out)
    }
}

/// Embeds a `2^k`-dimensional matrix acting on the listed wires into the
/// full `2^n`-dimensional space, identity on untouched wires.
fn embed(local: &ComplexMatrix, wires: &[usize], n: usize) -> Result<ComplexMatrix> {
    let dim = checked_dim(n)?;
    let k = wires.len();
    let local_dim = 1usize << k;
    if local.rows() != local_dim || local.cols() != local_dim {
        return Err(Error::DimensionMismatch(format!(
            "gate matrix is {}x{} but acts on {} wires",
            local.rows(),
            local.cols(),
            k
        )));
    }
    if k == n && wires.iter().enumerate().all(|(i, &w)| i == w) {
        return Ok(local.clone());
    }
    let mut out = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut local_in = 0usize;
        let mut base = col;
        for (m, &w) in wires.iter().enumerate() {
            let bit = (col >> (n - 1 - w)) & 1;
            local_in |= bit << (k - 1 - m);
            base &= !(1usize << (n - 1 - w));
        }
        for local_out in 0..local_dim {
            let amp = local.get(local_out, local_in);
            if amp.re == 0.0 && amp.im == 0.0 {
                continue;
            }
            let mut row = base;
            for (m, &w) in wires.iter().enumerate() {
                let bit = (local_out >> (k - 1 - m)) & 1;
                row |= bit << (n - 1 - w);
            }
            out.set(row, col, amp);
        }
    }
    Ok(out)
}

/// Dense unitary of the whole circuit: the ordered product of gate
/// embeddings, first gate applied first.
pub fn assemble(circuit: &Circuit) -> Result<UnitaryMatrix> {
    let dim = checked_dim(circuit.n)?;
    let mut total = ComplexMatrix::identity(dim);
    for gate in &circuit.gates {
        let g = embed(&gate.local_matrix(), &gate.wires(circuit.n), circuit.n)?;
        total = g.mul(&total);
    }
    Ok(UnitaryMatrix::trusted(total))
}

/// Haar-distributed random unitary on `n` qubits, deterministic per seed.
///
/// Complex Ginibre sample orthonormalized by modified Gram-Schmidt with one
/// re-orthogonalization pass; the positive-diagonal `R` convention makes the
/// resulting `Q` Haar-distributed without a phase correction.
pub fn haar_random(n: usize, seed: u64) -> Result<UnitaryMatrix> {
    let dim = checked_dim(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    Complex64::new(
                        rng.sample::<f64, _>(StandardNormal) * scale,
                        rng.sample::<f64, _>(StandardNormal) * scale,
                    )
                })
                .collect()
        })
        .collect();

    for j in 0..dim {
        let (head, tail) = cols.split_at_mut(j);
        let col = &mut tail[0];
        for _ in 0..2 {
            for q in head.iter() {
                let mut r = Complex64::new(0.0, 0.0);
                for i in 0..dim {
                    r += q[i].conj() * col[i];
                }
                for i in 0..dim {
                    col[i] -= r * q[i];
                }
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            col[j] = Complex64::new(1.0, 0.0);
        } else {
            let inv = 1.0 / norm;
            for z in col.iter_mut() {
                *z *= inv;
            }
        }
    }

    let m = ComplexMatrix::from_fn(dim, dim, |r, c| cols[c][r]);
    Ok(UnitaryMatrix::trusted(m))
}

/// Random full-rank density matrix `G G† / tr(G G†)` from a seeded complex
/// Ginibre sample.
pub fn random_density_matrix(qubits: usize, seed: u64) -> Result<DensityMatrix> {
    let dim = checked_dim(qubits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let mut rho = g.mul(&g.dagger());
    let tr = rho.trace().re;
    rho = rho.scale(Complex64::new(1.0 / tr, 0.0));
    rho.hermitian_symmetrize();
    Ok(DensityMatrix::trusted(rho))
}

/// Step `i` (1-based) of the SWAP staircase: on `1 + system_qubits` wires,
/// a single SWAP between the ancilla (wire 0) and system wire `i`.
pub fn swap_staircase(step: usize, system_qubits: usize) -> Result<Circuit> {
    if step == 0 || step > system_qubits {
        return Err(Error::InvalidCircuit(format!(
            "staircase step {step} out of range 1..={system_qubits}"
        )));
    }
    let mut circuit = Circuit::new(1 + system_qubits)?;
    circuit.push(Gate::Swap(0, step))?;
    Ok(circuit)
}

/// Repeated-interaction plan: each step acts on `ancillas + system` qubits;
/// after a step the ancillas are discarded and re-prepared in `refresh`.
#[derive(Clone, Debug)]
pub struct RepeatedInteractionPlan {
    ancillas: usize,
    system: usize,
    steps: Vec<Circuit>,
    refresh: Vec<Complex64>,
}

impl RepeatedInteractionPlan {
    pub fn new(
        ancillas: usize,
        system: usize,
        steps: Vec<Circuit>,
        refresh: Vec<Complex64>,
    ) -> Result<Self> {
        if ancillas == 0 || system == 0 {
            return Err(Error::InvalidCircuit(
                "plan needs at least one ancilla and one system qubit".into(),
            ));
        }
        if steps.is_empty() {
            return Err(Error::InvalidCircuit("plan needs at least one step".into()));
        }
        for (t, step) in steps.iter().enumerate() {
            if step.n() != ancillas + system {
                return Err(Error::InvalidCircuit(format!(
                    "step {t} acts on {} qubits, expected {}",
                    step.n(),
                    ancillas + system
                )));
            }
        }
        if refresh.len() != (1usize << ancillas) {
            return Err(Error::InvalidCircuit(format!(
                "refresh state has {} amplitudes, expected {}",
                refresh.len(),
                1usize << ancillas
            )));
        }
        let norm: f64 = refresh.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidCircuit(format!(
                "refresh state norm {norm} is not 1"
            )));
        }
        Ok(Self {
            ancillas,
            system,
            steps,
            refresh,
        })
    }

    /// The staircase plan: one fresh |0⟩ ancilla per step, step `i` swapping
    /// it onto system wire `i`.
    pub fn staircase(system: usize) -> Result<Self> {
        let steps = (1..=system)
            .map(|i| swap_staircase(i, system))
            .collect::<Result<Vec<_>>>()?;
        let mut refresh = vec![Complex64::new(0.0, 0.0); 2];
        refresh[0] = Complex64::new(1.0, 0.0);
        Self::new(1, system, steps, refresh)
    }

    /// Plan whose steps are independent Haar-random unitaries.
    pub fn random(ancillas: usize, system: usize, k: usize, seed: u64) -> Result<Self> {
        let steps = (0..k)
            .map(|t| {
                let u = haar_random(ancillas + system, crate::seeding::derive(seed, 0x5745, t as u64))?;
                let mut circuit = Circuit::new(ancillas + system)?;
                circuit.push(Gate::Full { matrix: u })?;
                Ok(circuit)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut refresh = vec![Complex64::new(0.0, 0.0); 1 << ancillas];
        refresh[0] = Complex64::new(1.0, 0.0);
        Self::new(ancillas, system, steps, refresh)
    }

    /// Plan truncated to its first `k` steps.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.steps.len() {
            return Err(Error::InvalidCircuit(format!(
                "prefix length {k} out of range 1..={}",
                self.steps.len()
            )));
        }
        Ok(Self {
            ancillas: self.ancillas,
            system: self.system,
            steps: self.steps[..k].to_vec(),
            refresh: self.refresh.clone(),
        })
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn system(&self) -> usize {
        self.system
    }

    pub fn k(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[Circuit] {
        &self.steps
    }

    pub fn refresh(&self) -> &[Complex64] {
        &self.refresh
    }

    fn refresh_is_zero_state(&self) -> bool {
        self.refresh[0] == Complex64::new(1.0, 0.0)
            && self.refresh[1..].iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}

/// Unitary completion with `target` as its first column (maps |0…0⟩ to the
/// target state); remaining columns are Gram-Schmidt completions of the
/// standard basis.
fn state_preparation_unitary(target: &[Complex64]) -> Result<UnitaryMatrix> {
    let dim = target.len();
    let mut cols: Vec<Vec<Complex64>> = vec![target.to_vec()];
    for e in 0..dim {
        if cols.len() == dim {
            break;
        }
        let mut cand = vec![Complex64::new(0.0, 0.0); dim];
        cand[e] = Complex64::new(1.0, 0.0);
        for q in &cols {
            let mut r = Complex64::new(0.0, 0.0);
            for i in 0..dim {
                r += q[i].conj() * cand[i];
            }
            for i in 0..dim {
                cand[i] -= r * q[i];
            }
        }
        let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        let inv = 1.0 / norm;
        for z in cand.iter_mut() {
            *z *= inv;
        }
        cols.push(cand);
    }
    if cols.len() != dim {
        return Err(Error::InvalidCircuit(
            "failed to complete preparation unitary".into(),
        ));
    }
    Ok(UnitaryMatrix::trusted(ComplexMatrix::from_fn(dim, dim, |r, c| cols[c][r])))
}

/// Unfolds a repeated-interaction plan into one circuit on `k*a + n` qubits:
/// step `t` acts on ancilla block `t` (wires `t*a..(t+1)*a`) and the system
/// wires at the bottom. The returned layout has `A = C =` all ancilla wires
/// and `B = D =` the system wires, matching a machine that starts every
/// ancilla in |0⟩ and discards them all at the end.
pub fn unfold(plan: &RepeatedInteractionPlan) -> Result<(Circuit, RegisterLayout)> {
    let a = plan.ancillas;
    let n = plan.system;
    let k = plan.k();
    let total = k * a + n;
    checked_dim(total)?;
    let mut circuit = Circuit::new(total)?;
    let needs_prep = !plan.refresh_is_zero_state();
    let prep = if needs_prep {
        Some(state_preparation_unitary(&plan.refresh)?)
    } else {
        None
    };
    for (t, step) in plan.steps.iter().enumerate() {
        let map_wire = |w: usize| -> usize {
            if w < a {
                t * a + w
            } else {
                k * a + (w - a)
            }
        };
        if let Some(prep) = &prep {
            let block: Vec<usize> = (0..a).map(|w| t * a + w).collect();
            let embedded = embed(prep.matrix(), &block, total)?;
            circuit.push(Gate::Full {
                matrix: UnitaryMatrix::trusted(embedded),
            })?;
        }
        for gate in step.gates() {
            let mapped = match gate {
                Gate::X(w) => Gate::X(map_wire(*w)),
                Gate::H(w) => Gate::H(map_wire(*w)),
                Gate::S(w) => Gate::S(map_wire(*w)),
                Gate::Swap(w1, w2) => Gate::Swap(map_wire(*w1), map_wire(*w2)),
                Gate::Cnot { control, target } => Gate::Cnot {
                    control: map_wire(*control),
                    target: map_wire(*target),
                },
                Gate::ControlledU {
                    control,
                    targets,
                    matrix,
                } => Gate::ControlledU {
                    control: map_wire(*control),
                    targets: targets.iter().map(|&w| map_wire(w)).collect(),
                    matrix: matrix.clone(),
                },
                Gate::Unitary1 { wire, matrix } => Gate::Unitary1 {
                    wire: map_wire(*wire),
                    matrix: matrix.clone(),
                },
                Gate::Unitary2 { wires, matrix } => Gate::Unitary2 {
                    wires: [map_wire(wires[0]), map_wire(wires[1])],
                    matrix: matrix.clone(),
                },
                Gate::Full { matrix } => {
                    let step_wires: Vec<usize> = (0..a + n).map(map_wire).collect();
                    Gate::Full {
                        matrix: UnitaryMatrix::trusted(embed(matrix.matrix(), &step_wires, total)?),
                    }
                }
            };
            circuit.push(mapped)?;
        }
    }
    let layout = RegisterLayout::new(k * a, n, k * a, n)?;
    Ok((circuit, layout))
}

/// Reference semantics for a plan: apply each step to
/// `refresh ⊗ state`, then trace out the ancillas and re-tensor.
pub fn simulate_sequential(
    plan: &RepeatedInteractionPlan,
    system_start: &DensityMatrix,
) -> Result<DensityMatrix> {
    if system_start.qubits() != plan.system {
        return Err(Error::DimensionMismatch(format!(
            "system state has {} qubits, plan expects {}",
            system_start.qubits(),
            plan.system
        )));
    }
    let refresh = pure_state(&plan.refresh)?;
    let mut state = system_start.clone();
    for step in &plan.steps {
        let joint = DensityMatrix::trusted(refresh.matrix().kron(state.matrix())?);
        let u = assemble(step)?;
        let evolved = apply_unitary(&joint, &u)?;
        state = partial_trace(&evolved, plan.ancillas)?;
    }
    Ok(state)
}

/// Which part of the normalized trace the Hadamard test estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TracePart {
    Real,
    Imaginary,
}

/// Monte-Carlo Hadamard test: estimates `Re tr(U)/2^n` (or `Im` with the
/// phase-gate variant) from `shots` Bernoulli samples of the clean qubit.
///
/// The mixed register is sampled by drawing a uniform basis state per shot,
/// which is faithful for the maximally mixed input and avoids building the
/// doubled-size density matrix; the clean-qubit outcome 0 then has
/// probability `(1 + Re⟨x|U|x⟩)/2`.
pub fn hadamard_test(u: &UnitaryMatrix, shots: usize, seed: u64, part: TracePart) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let dim = u.dim();
    if !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "unitary dimension {dim} is not a power of two"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc: i64 = 0;
    for _ in 0..shots {
        let x = rng.gen_range(0..dim);
        let diag = u.entry(x, x);
        let value = match part {
            TracePart::Real => diag.re,
            TracePart::Imaginary => diag.im,
        };
        let p0 = (0.5 * (1.0 + value)).clamp(0.0, 1.0);
        if rng.gen::<f64>() < p0 {
            acc += 1;
        } else {
            acc -= 1;
        }
    }
    Ok(acc as f64 / shots as f64)
}

#[derive(Serialize, Deserialize)]
struct GateRecord {
    kind: String,
    wires: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct CircuitRepr {
    n: usize,
    gates: Vec<GateRecord>,
}

fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<[f64; 2]> {
    m.entries().iter().map(|z| [z.re, z.im]).collect()
}

fn pairs_to_unitary(pairs: &[[f64; 2]], dim: usize) -> Result<UnitaryMatrix> {
    let entries: Vec<Complex64> = pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    UnitaryMatrix::new(ComplexMatrix::new(dim, dim, entries)?)
}

impl Serialize for Circuit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let gates = self
            .gates
            .iter()
            .map(|g| match g {
                Gate::X(w) => GateRecord { kind: "x".into(), wires: vec![*w], matrix: None },
                Gate::H(w) => GateRecord { kind: "h".into(), wires: vec![*w], matrix: None },
                Gate::S(w) => GateRecord { kind: "s".into(), wires: vec![*w], matrix: None },
                Gate::Swap(w1, w2) => GateRecord {
                    kind: "swap".into(),
                    wires: vec![*w1, *w2],
                    matrix: None,
                },
                Gate::Cnot { control, target } => GateRecord {
                    kind: "cnot".into(),
                    wires: vec![*control, *target],
                    matrix: None,
                },
                Gate::ControlledU { control, targets, matrix } => {
                    let mut wires = vec![*control];
                    wires.extend_from_slice(targets);
                    GateRecord {
                        kind: "cu".into(),
                        wires,
                        matrix: Some(matrix_to_pairs(matrix.matrix())),
                    }
                }
                Gate::Unitary1 { wire, matrix } => GateRecord {
                    kind: "u1".into(),
                    wires: vec![*wire],
                    matrix: Some(matrix_to_pairs(matrix.matrix())),
                },
                Gate::Unitary2 { wires, matrix } => GateRecord {
                    kind: "u2".into(),
                    wires: wires.to_vec(),
                    matrix: Some(matrix_to_pairs(matrix.matrix())),
                },
                Gate::Full { matrix } => GateRecord {
                    kind: "full".into(),
                    wires: (0..self.n).collect(),
                    matrix: Some(matrix_to_pairs(matrix.matrix())),
                },
            })
            .collect();
        CircuitRepr { n: self.n, gates }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = CircuitRepr::deserialize(deserializer)?;
        let mut circuit = Circuit::new(repr.n).map_err(D::Error::custom)?;
        for record in &repr.gates {
            let need = |dim: usize| -> std::result::Result<UnitaryMatrix, D::Error> {
                let pairs = record
                    .matrix
                    .as_ref()
                    .ok_or_else(|| D::Error::custom(format!("gate '{}' needs a matrix", record.kind)))?;
                pairs_to_unitary(pairs, dim).map_err(D::Error::custom)
            };
            let wire = |i: usize| -> std::result::Result<usize, D::Error> {
                record
                    .wires
                    .get(i)
                    .copied()
                    .ok_or_else(|| D::Error::custom(format!("gate '{}' is missing wire {i}", record.kind)))
            };
            let gate = match record.kind.as_str() {
                "x" => Gate::X(wire(0)?),
                "h" => Gate::H(wire(0)?),
                "s" => Gate::S(wire(0)?),
                "swap" => Gate::Swap(wire(0)?, wire(1)?),
                "cnot" => Gate::Cnot { control: wire(0)?, target: wire(1)? },
                "cu" => {
                    if record.wires.len() < 2 {
                        return Err(D::Error::custom("cu gate needs a control and targets"));
                    }
                    let targets = record.wires[1..].to_vec();
                    Gate::ControlledU {
                        control: record.wires[0],
                        matrix: need(1 << targets.len())?,
                        targets,
                    }
                }
                "u1" => Gate::Unitary1 { wire: wire(0)?, matrix: need(2)? },
                "u2" => Gate::Unitary2 { wires: [wire(0)?, wire(1)?], matrix: need(4)? },
                "full" => Gate::Full { matrix: need(1 << repr.n)? },
                other => return Err(D::Error::custom(format!("unknown gate kind '{other}'"))),
            };
            circuit.push(gate).map_err(D::Error::custom)?;
        }
        Ok(circuit)
    }
}
