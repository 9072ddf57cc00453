//! The ((5,5,2)) codeword-stabilized code.
//!
//! Qubits 2–4 form the register carrying the five logical basis states
//! `|000⟩ … |100⟩`; qubits 1 and 5 start in `|0⟩` and hold the syndrome after
//! decoding. Each codeword is an equal superposition of a five-bit string and
//! its complement.
//!
//! The encoder is a basis permutation `|0 b 0⟩ → |v_b⟩` followed by `H₁` and a
//! fan-out of CNOTs from qubit 1. For every error location `q` the decoder
//! `D_q` maps the twenty orthonormal states `P_q|φ_b⟩` onto
//! `|s(P)⟩₁₅ ⊗ |b⟩₂₃₄`, completed to a unitary on the remaining twelve
//! dimensions by Gram–Schmidt over the computational basis.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error_model::{Pauli, Syndrome};
use crate::statevec::{qubit_mask, GateOp, PureState, ALGEBRAIC_TOL};
use crate::{CMatrix, Result, SimError, C64};

pub const N_QUBITS: usize = 5;
pub const LOGICAL_DIM: usize = 5;
pub const DISTANCE: usize = 2;
pub const REGISTER_QUBITS: [usize; 3] = [2, 3, 4];
pub const SYNDROME_QUBITS: [usize; 2] = [1, 5];
const ALL_QUBITS: [usize; N_QUBITS] = [1, 2, 3, 4, 5];

/// `(left, right)` bit strings of each codeword `(|left⟩ + |right⟩)/√2`.
pub const CODEWORD_STRINGS: [(&str, &str); LOGICAL_DIM] = [
    ("00001", "11110"),
    ("00010", "11101"),
    ("01000", "10111"),
    ("00100", "11011"),
    ("10000", "01111"),
];

/// Representative of each codeword with qubit 1 in `|0⟩`.
const REPRESENTATIVES: [usize; LOGICAL_DIM] = [0b00001, 0b00010, 0b01000, 0b00100, 0b01111];

const DIM: usize = 1 << N_QUBITS;
const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Basis index of `|0⟩₁|b⟩₂₃₄|0⟩₅`.
pub fn input_index(b: usize) -> usize {
    b << 1
}

/// Basis index of `|j⟩₁|b⟩₂₃₄|l⟩₅`.
pub fn output_index(s: Syndrome, b: usize) -> usize {
    ((s.j() as usize) << 4) | (b << 1) | s.l() as usize
}

fn bits(s: &str) -> usize {
    usize::from_str_radix(s, 2).expect("static bit string")
}

fn table_codewords() -> Vec<PureState> {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CODEWORD_STRINGS
        .iter()
        .map(|(a, b)| {
            let mut amps = vec![ZERO; DIM];
            amps[bits(a)] = h;
            amps[bits(b)] = h;
            PureState::from_amplitudes(amps).expect("normalised codeword")
        })
        .collect()
}

/// Permutation matrix for `|0 b 0⟩ → |v_b⟩`, completed by pairing the unused
/// sources and targets in increasing index order.
fn encoder_permutation() -> CMatrix {
    let mut target_of = [usize::MAX; DIM];
    let mut used = [false; DIM];
    for (b, &v) in REPRESENTATIVES.iter().enumerate() {
        target_of[input_index(b)] = v;
        used[v] = true;
    }
    let mut free_targets = (0..DIM).filter(|t| !used[*t]);
    for t in target_of.iter_mut().filter(|t| **t == usize::MAX) {
        *t = free_targets.next().expect("permutation completion");
    }
    let mut p = CMatrix::zeros(DIM, DIM);
    for (src, &dst) in target_of.iter().enumerate() {
        p[(dst, src)] = ONE;
    }
    p
}

/// Reference encoding circuit on qubits 1..=5.
pub fn encoder_circuit() -> Vec<GateOp> {
    let mut circuit = vec![
        GateOp::unitary((1..=N_QUBITS).collect(), encoder_permutation()),
        GateOp::h(1),
    ];
    circuit.extend((2..=N_QUBITS).map(|t| GateOp::cnot(1, t)));
    circuit
}

fn circuit_matrix(circuit: &[GateOp]) -> Result<CMatrix> {
    let mut u = CMatrix::zeros(DIM, DIM);
    for col in 0..DIM {
        let out = PureState::basis(N_QUBITS, col)?.apply_circuit(circuit)?;
        u.set_column(col, &nalgebra::DVector::from_column_slice(out.amplitudes()));
    }
    Ok(u)
}

/// Applies a single-qubit Pauli to one qubit of a state.
pub fn apply_pauli(state: &PureState, q: usize, p: Pauli) -> Result<PureState> {
    if p == Pauli::E {
        return Ok(state.clone());
    }
    state.apply_gate(&GateOp::single(q, p.matrix()))
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Orthonormal completion of `span(given)` inside `C^dim`, seeded with the
/// computational basis in index order.
fn complete_basis(given: &[Vec<C64>], dim: usize) -> Result<Vec<Vec<C64>>> {
    let mut basis: Vec<Vec<C64>> = given.to_vec();
    let mut extra = Vec::new();
    for i in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = vec![ZERO; dim];
        v[i] = ONE;
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for u in &basis {
                let c = inner(u, &v);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v.clone());
            extra.push(v);
        }
    }
    if basis.len() != dim {
        return Err(SimError::Construction(format!(
            "completion reached rank {} of {dim}",
            basis.len()
        )));
    }
    Ok(extra)
}

/// Gram matrix deviation from the identity.
fn gram_defect(vectors: &[Vec<C64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((inner(a, b) - target).norm());
        }
    }
    worst
}

/// The twenty states `P_q|φ_b⟩`, ordered by Pauli then by `b`.
pub fn error_images(codewords: &[PureState], q: usize) -> Result<Vec<(Pauli, usize, PureState)>> {
    let mut out = Vec::with_capacity(4 * codewords.len());
    for p in Pauli::ALL {
        for (b, cw) in codewords.iter().enumerate() {
            out.push((p, b, apply_pauli(cw, q, p)?));
        }
    }
    Ok(out)
}

fn build_decoder(codewords: &[PureState], q: usize) -> Result<CMatrix> {
    let images = error_images(codewords, q)?;
    let inputs: Vec<Vec<C64>> = images.iter().map(|(_, _, s)| s.amplitudes().to_vec()).collect();
    let defect = gram_defect(&inputs);
    if defect > ALGEBRAIC_TOL {
        return Err(SimError::Construction(format!(
            "error images at qubit {q} are not orthonormal (defect {defect:.3e})"
        )));
    }
    let outputs: Vec<Vec<C64>> = images
        .iter()
        .map(|(p, b, _)| {
            let mut v = vec![ZERO; DIM];
            v[output_index(p.syndrome(), *b)] = ONE;
            v
        })
        .collect();
    let in_rest = complete_basis(&inputs, DIM)?;
    let out_rest = complete_basis(&outputs, DIM)?;
    let mut d = CMatrix::zeros(DIM, DIM);
    for (src, dst) in inputs.iter().chain(&in_rest).zip(outputs.iter().chain(&out_rest)) {
        for r in 0..DIM {
            if dst[r] == ZERO {
                continue;
            }
            for c in 0..DIM {
                d[(r, c)] += dst[r] * src[c].conj();
            }
        }
    }
    Ok(d)
}

/// Immutable description of the code together with its encoder and the five
/// location-specific decoders.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    codewords: Vec<PureState>,
    encoder: CMatrix,
    decoders: Vec<CMatrix>,
    /// Set for codes built here; imported matrices are validated on use.
    trusted: bool,
}

/// Constructs the ((5,5,2)) code.
pub fn build_code() -> Result<CodeSpec> {
    let codewords = table_codewords();
    let encoder = circuit_matrix(&encoder_circuit())?;
    let decoders = (1..=N_QUBITS)
        .map(|q| build_decoder(&codewords, q))
        .collect::<Result<Vec<_>>>()?;
    let code = CodeSpec {
        codewords,
        encoder,
        decoders,
        trusted: true,
    };
    let ortho = orthonormality_defect(&code.codewords);
    let enc = encoder_defect(&code);
    if ortho > ALGEBRAIC_TOL || enc > ALGEBRAIC_TOL {
        return Err(SimError::Construction(format!(
            "encoder defect {enc:.3e}, orthonormality defect {ortho:.3e}"
        )));
    }
    Ok(code)
}

impl CodeSpec {
    pub fn codewords(&self) -> &[PureState] {
        &self.codewords
    }

    pub fn codeword(&self, b: usize) -> &PureState {
        &self.codewords[b]
    }

    pub fn encoder(&self) -> &CMatrix {
        &self.encoder
    }

    pub(crate) fn is_trusted(&self) -> bool {
        self.trusted
    }

    pub fn decoder(&self, location: usize) -> Result<&CMatrix> {
        if !(1..=N_QUBITS).contains(&location) {
            return Err(SimError::InvalidLocation(location));
        }
        Ok(&self.decoders[location - 1])
    }

    /// Embeds a three-qubit register state as `|0⟩|ψ⟩|0⟩`, rejecting weight
    /// on `|101⟩`, `|110⟩`, `|111⟩`.
    pub fn logical_input(register: &PureState) -> Result<PureState> {
        if register.n_qubits() != REGISTER_QUBITS.len() {
            return Err(SimError::DimensionMismatch {
                expected: 1 << REGISTER_QUBITS.len(),
                got: register.dim(),
            });
        }
        let leak: f64 = register.amplitudes()[LOGICAL_DIM..]
            .iter()
            .map(|a| a.norm_sqr())
            .sum();
        if leak > 1e-12 {
            return Err(SimError::OutsideCodeSpace(leak));
        }
        let zero = PureState::zero(1)?;
        zero.tensor(register)?.tensor(&zero)
    }

    /// Register amplitudes `Σ c_b |b⟩` to `Σ c_b |φ_b⟩`.
    pub fn encode(&self, register: &PureState) -> Result<PureState> {
        let input = Self::logical_input(register)?;
        if self.trusted {
            return Ok(input.apply_trusted_unitary(&self.encoder, &ALL_QUBITS));
        }
        input.apply_unitary_subset(&self.encoder, &ALL_QUBITS)
    }

    /// Applies the decoder for an error at `location`.
    pub fn decode(&self, corrupted: &PureState, location: usize) -> Result<PureState> {
        let d = self.decoder(location)?;
        if self.trusted && corrupted.n_qubits() == N_QUBITS {
            return Ok(corrupted.apply_trusted_unitary(d, &ALL_QUBITS));
        }
        corrupted.apply_unitary_subset(d, &ALL_QUBITS)
    }

    pub fn to_document(&self) -> CodeDocument {
        CodeDocument {
            n: N_QUBITS,
            k: self.codewords.len(),
            d: DISTANCE,
            register_qubits: REGISTER_QUBITS.to_vec(),
            syndrome_qubits: SYNDROME_QUBITS.to_vec(),
            codewords: self
                .codewords
                .iter()
                .map(|s| s.amplitudes().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            encoder: matrix_to_rows(&self.encoder),
            decoders: self.decoders.iter().map(matrix_to_rows).collect(),
        }
    }

    /// Imports a document without checking any code property; use
    /// [`verify_code`] for that.
    pub fn from_document(doc: &CodeDocument) -> Result<Self> {
        if doc.codewords.is_empty() {
            return Err(SimError::MalformedCode("no codewords".into()));
        }
        let codewords = doc
            .codewords
            .iter()
            .map(|cw| {
                if cw.len() != DIM {
                    return Err(SimError::MalformedCode(format!(
                        "codeword has {} amplitudes, expected {DIM}",
                        cw.len()
                    )));
                }
                PureState::from_amplitudes(cw.iter().map(|&[re, im]| C64::new(re, im)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        if doc.decoders.len() != N_QUBITS {
            return Err(SimError::MalformedCode(format!(
                "{} decoders, expected {N_QUBITS}",
                doc.decoders.len()
            )));
        }
        Ok(Self {
            codewords,
            encoder: rows_to_matrix(&doc.encoder)?,
            decoders: doc
                .decoders
                .iter()
                .map(|d| rows_to_matrix(d))
                .collect::<Result<Vec<_>>>()?,
            trusted: false,
        })
    }
}

/// JSON form of a [`CodeSpec`]: complex numbers as `[re, im]`, matrices
/// row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeDocument {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub d: usize,
    pub register_qubits: Vec<usize>,
    pub syndrome_qubits: Vec<usize>,
    pub codewords: Vec<Vec<[f64; 2]>>,
    pub encoder: Vec<Vec<[f64; 2]>>,
    pub decoders: Vec<Vec<Vec<[f64; 2]>>>,
}

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    if rows.len() != DIM || rows.iter().any(|r| r.len() != DIM) {
        return Err(SimError::MalformedCode(format!("matrix must be {DIM}×{DIM}")));
    }
    Ok(CMatrix::from_fn(DIM, DIM, |r, c| {
        let [re, im] = rows[r][c];
        C64::new(re, im)
    }))
}

/// Knill–Laflamme data for erasures at one location.
#[derive(Debug, Clone, Serialize)]
pub struct LocationReport {
    pub location: usize,
    pub pass: bool,
    /// `C[P][Q]` in `E, X, Z, Y` order, as `[re, im]`.
    pub c_matrix: [[[f64; 2]; 4]; 4],
    pub max_violation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErasureReport {
    pub locations: Vec<LocationReport>,
}

impl ErasureReport {
    pub fn all_pass(&self) -> bool {
        self.locations.iter().all(|l| l.pass)
    }
}

/// Largest `|M_bc − C δ_bc|` for the matrix `M_bc = ⟨φ_b|A φ_c⟩` where
/// `applied[c] = A|φ_c⟩`; `C` is taken from `M_00`.
fn kl_violation(codewords: &[PureState], applied: &[PureState]) -> (C64, f64) {
    let c = codewords[0].overlap(&applied[0]).unwrap_or(ZERO);
    let mut worst = 0.0f64;
    for (b, cb) in codewords.iter().enumerate() {
        for (k, ac) in applied.iter().enumerate() {
            let m = cb.overlap(ac).unwrap_or(ZERO);
            let expect = if b == k { c } else { ZERO };
            worst = worst.max((m - expect).norm());
        }
    }
    (c, worst)
}

/// Checks `⟨φ_b|P†Q|φ_c⟩ = C_PQ δ_bc` for all single-qubit Paulis at each
/// location.
pub fn verify_erasure_correctability(codewords: &[PureState]) -> Result<ErasureReport> {
    let n = codewords.first().map(PureState::n_qubits).unwrap_or(0);
    let mut locations = Vec::with_capacity(n);
    for q in 1..=n {
        let images: Vec<Vec<PureState>> = Pauli::ALL
            .iter()
            .map(|&p| codewords.iter().map(|cw| apply_pauli(cw, q, p)).collect())
            .collect::<Result<_>>()?;
        let mut c_matrix = [[[0.0; 2]; 4]; 4];
        let mut worst = 0.0f64;
        for (i, pi) in images.iter().enumerate() {
            for (j, qj) in images.iter().enumerate() {
                // ⟨φ_b|P†Q|φ_c⟩ = ⟨Pφ_b|Qφ_c⟩
                let mut c = ZERO;
                for (b, pb) in pi.iter().enumerate() {
                    for (k, qk) in qj.iter().enumerate() {
                        let m = pb.overlap(qk)?;
                        if b == 0 && k == 0 {
                            c = m;
                        }
                        let expect = if b == k { c } else { ZERO };
                        worst = worst.max((m - expect).norm());
                    }
                }
                c_matrix[i][j] = [c.re, c.im];
            }
        }
        locations.push(LocationReport {
            location: q,
            pass: worst <= ALGEBRAIC_TOL,
            c_matrix,
            max_violation: worst,
        });
    }
    Ok(ErasureReport { locations })
}

/// Tensor product of single-qubit Paulis, qubit 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| **p != Pauli::E).count()
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        let n = state.n_qubits();
        if self.0.len() != n {
            return Err(SimError::DimensionMismatch {
                expected: n,
                got: self.0.len(),
            });
        }
        let (mut x_mask, mut z_mask, mut y_count) = (0usize, 0usize, 0u32);
        for (i, p) in self.0.iter().enumerate() {
            let m = qubit_mask(n, i + 1);
            match p {
                Pauli::E => {}
                Pauli::X => x_mask |= m,
                Pauli::Z => z_mask |= m,
                Pauli::Y => {
                    x_mask |= m;
                    z_mask |= m;
                    y_count += 1;
                }
            }
        }
        // Y = i X Z
        let global = C64::i().powu(y_count);
        let mut amps = vec![ZERO; state.dim()];
        for (idx, a) in state.amplitudes().iter().enumerate() {
            let sign = if (idx & z_mask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            amps[idx ^ x_mask] = a * global * sign;
        }
        PureState::from_amplitudes(amps)
    }

    /// All Pauli strings on `n` qubits with exactly `weight` non-identity factors.
    pub fn of_weight(n: usize, weight: usize) -> Vec<PauliString> {
        let mut out = Vec::new();
        let total = 4usize.pow(n as u32);
        for code in 0..total {
            let ps: Vec<Pauli> = (0..n)
                .map(|i| Pauli::ALL[(code / 4usize.pow((n - 1 - i) as u32)) % 4])
                .collect();
            let s = PauliString(ps);
            if s.weight() == weight {
                out.push(s);
            }
        }
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DistanceReport {
    pub distance: usize,
    /// First Pauli (in enumeration order) of weight `distance` that violates
    /// the Knill–Laflamme condition; `None` when no Pauli does.
    pub witness: Option<PauliString>,
    pub witness_violation: f64,
}

/// Smallest weight of a Pauli `P` with `⟨φ_b|P|φ_c⟩ ≠ C_P δ_bc`. Returns
/// `n + 1` and no witness if every Pauli passes.
pub fn verify_distance(codewords: &[PureState]) -> Result<DistanceReport> {
    let n = codewords.first().map(PureState::n_qubits).unwrap_or(0);
    for w in 0..=n {
        for p in PauliString::of_weight(n, w) {
            let applied = codewords
                .iter()
                .map(|cw| p.apply(cw))
                .collect::<Result<Vec<_>>>()?;
            let (_, violation) = kl_violation(codewords, &applied);
            if violation > ALGEBRAIC_TOL {
                return Ok(DistanceReport {
                    distance: w,
                    witness: Some(p),
                    witness_violation: violation,
                });
            }
        }
    }
    Ok(DistanceReport {
        distance: n + 1,
        witness: None,
        witness_violation: 0.0,
    })
}

/// Maximum `|⟨φ_b|φ_c⟩ − δ_bc|`.
pub fn orthonormality_defect(codewords: &[PureState]) -> f64 {
    let vecs: Vec<Vec<C64>> = codewords.iter().map(|c| c.amplitudes().to_vec()).collect();
    gram_defect(&vecs)
}

/// Combined verification of a code and its encoder/decoders.
#[derive(Debug, Clone)]
pub struct CodeReport {
    pub orthonormal: bool,
    pub orthonormality_defect: f64,
    pub encoder_ok: bool,
    pub encoder_defect: f64,
    /// Per location: largest deviation of `D_q P_q|φ_b⟩` from `|s(P)⟩|b⟩`.
    pub decoder_defects: Vec<f64>,
    pub erasure: Option<ErasureReport>,
    pub distance: Option<DistanceReport>,
}

impl CodeReport {
    pub fn decoders_ok(&self) -> bool {
        self.decoder_defects.iter().all(|&d| d <= 1e-10)
    }

    pub fn all_pass(&self) -> bool {
        self.orthonormal
            && self.encoder_ok
            && self.decoders_ok()
            && self.erasure.as_ref().is_some_and(ErasureReport::all_pass)
            && self.distance.as_ref().is_some_and(|d| d.distance == DISTANCE)
    }
}

/// Largest deviation of the encoder from `|0 b 0⟩ → |φ_b⟩`, or from unitarity.
fn encoder_defect(code: &CodeSpec) -> f64 {
    let mut worst = crate::statevec::unitarity_defect(&code.encoder);
    for (b, cw) in code.codewords.iter().enumerate() {
        for r in 0..DIM {
            worst = worst.max((code.encoder[(r, input_index(b))] - cw.amplitude(r)).norm());
        }
    }
    worst
}

pub fn verify_code(code: &CodeSpec) -> CodeReport {
    let cws = code.codewords();
    let ortho = orthonormality_defect(cws);

    let encoder_defect = encoder_defect(code);

    let decoder_defects = (1..=N_QUBITS)
        .map(|q| {
            let d = &code.decoders[q - 1];
            let mut worst = crate::statevec::unitarity_defect(d);
            let Ok(images) = error_images(cws, q) else {
                return f64::INFINITY;
            };
            for (p, b, img) in images {
                let Ok(out) = img.apply_unitary_subset(d, &[1, 2, 3, 4, 5]) else {
                    return f64::INFINITY;
                };
                let target = output_index(p.syndrome(), b);
                for (r, a) in out.amplitudes().iter().enumerate() {
                    let expect = if r == target { ONE } else { ZERO };
                    worst = worst.max((a - expect).norm());
                }
            }
            worst
        })
        .collect();

    CodeReport {
        orthonormal: ortho <= ALGEBRAIC_TOL,
        orthonormality_defect: ortho,
        encoder_ok: encoder_defect <= ALGEBRAIC_TOL,
        encoder_defect,
        decoder_defects,
        erasure: verify_erasure_correctability(cws).ok(),
        distance: verify_distance(cws).ok(),
    }
}
