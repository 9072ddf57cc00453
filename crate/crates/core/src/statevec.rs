//! Dense state-vector and density-matrix engine.
//!
//! Qubits are labelled `1..=n`; qubit 1 is the most significant bit of the
//! basis index, so the ket `|00001⟩` is index 1 and has qubit 5 set.

use std::collections::HashSet;

use nalgebra::Matrix2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{CMatrix, Result, SimError, C64};

/// Largest register the dense engine accepts.
pub const MAX_QUBITS: usize = 16;

/// Tolerance for algebraic identities (unitarity, normalisation).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Bit mask of 1-based qubit `q` in an `n`-qubit register.
#[inline]
pub fn qubit_mask(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - q)
}

fn check_qubit(n_qubits: usize, q: usize) -> Result<()> {
    if q == 0 || q > n_qubits {
        return Err(SimError::QubitOutOfRange { index: q, n_qubits });
    }
    Ok(())
}

fn check_distinct(n_qubits: usize, qubits: &[usize]) -> Result<()> {
    let mut seen = HashSet::with_capacity(qubits.len());
    for &q in qubits {
        check_qubit(n_qubits, q)?;
        if !seen.insert(q) {
            return Err(SimError::RepeatedQubit(q));
        }
    }
    Ok(())
}

/// Maximum elementwise deviation of `U†U` from the identity.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

fn check_unitary(u: &CMatrix) -> Result<()> {
    let defect = unitarity_defect(u);
    if defect > ALGEBRAIC_TOL {
        return Err(SimError::NotUnitary(defect));
    }
    Ok(())
}

fn to_dynamic(m: &Matrix2<C64>) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

/// Standard single-qubit matrices.
pub mod gates {
    use super::*;

    pub fn identity() -> Matrix2<C64> {
        Matrix2::identity()
    }

    pub fn pauli_x() -> Matrix2<C64> {
        Matrix2::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn pauli_y() -> Matrix2<C64> {
        Matrix2::new(ZERO, -C64::i(), C64::i(), ZERO)
    }

    pub fn pauli_z() -> Matrix2<C64> {
        Matrix2::new(ONE, ZERO, ZERO, -ONE)
    }

    pub fn hadamard() -> Matrix2<C64> {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Matrix2::new(s, s, s, -s)
    }

    /// `exp(-i θ n·σ / 2)` for a unit axis `n`.
    pub fn rotation(axis: [f64; 3], theta: f64) -> Matrix2<C64> {
        let (s, c) = (theta / 2.0).sin_cos();
        let [nx, ny, nz] = axis;
        let mi = -C64::i() * s;
        identity() * C64::new(c, 0.0)
            + pauli_x() * (mi * nx)
            + pauli_y() * (mi * ny)
            + pauli_z() * (mi * nz)
    }
}

/// A circuit element acting on 1-based qubit labels.
#[derive(Debug, Clone, PartialEq)]
pub enum GateOp {
    Single {
        target: usize,
        matrix: Matrix2<C64>,
    },
    /// Applies `matrix` to `target` when every control qubit is `|1⟩`.
    Controlled {
        controls: Vec<usize>,
        target: usize,
        matrix: Matrix2<C64>,
    },
    /// Full unitary on `qubits`; the first listed qubit is the most
    /// significant bit of the matrix index.
    Unitary { qubits: Vec<usize>, matrix: CMatrix },
}

impl GateOp {
    pub fn single(target: usize, matrix: Matrix2<C64>) -> Self {
        GateOp::Single { target, matrix }
    }

    pub fn x(target: usize) -> Self {
        Self::single(target, gates::pauli_x())
    }

    pub fn h(target: usize) -> Self {
        Self::single(target, gates::hadamard())
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateOp::Controlled {
            controls: vec![control],
            target,
            matrix: gates::pauli_x(),
        }
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        GateOp::Controlled {
            controls: vec![c1, c2],
            target,
            matrix: gates::pauli_x(),
        }
    }

    pub fn rotation(target: usize, axis: [f64; 3], theta: f64) -> Self {
        Self::single(target, gates::rotation(axis, theta))
    }

    pub fn unitary(qubits: Vec<usize>, matrix: CMatrix) -> Self {
        GateOp::Unitary { qubits, matrix }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        match self {
            GateOp::Single { target, matrix } => {
                check_qubit(n_qubits, *target)?;
                check_unitary(&to_dynamic(matrix))
            }
            GateOp::Controlled {
                controls,
                target,
                matrix,
            } => {
                let mut all = controls.clone();
                all.push(*target);
                check_distinct(n_qubits, &all)?;
                check_unitary(&to_dynamic(matrix))
            }
            GateOp::Unitary { qubits, matrix } => validate_subset(n_qubits, matrix, qubits),
        }
    }
}

fn validate_subset(n_qubits: usize, u: &CMatrix, qubits: &[usize]) -> Result<()> {
    if qubits.is_empty() {
        return Err(SimError::EmptyQubitList);
    }
    check_distinct(n_qubits, qubits)?;
    let dim = 1usize << qubits.len();
    if u.nrows() != dim || u.ncols() != dim {
        return Err(SimError::DimensionMismatch {
            expected: dim,
            got: u.nrows().max(u.ncols()),
        });
    }
    check_unitary(u)
}

// In-place kernels. They assume validated arguments.

fn kernel_single(amps: &mut [C64], n: usize, q: usize, m: &Matrix2<C64>, ctrl_mask: usize) {
    let mask = qubit_mask(n, q);
    for i0 in 0..amps.len() {
        if i0 & mask != 0 || i0 & ctrl_mask != ctrl_mask {
            continue;
        }
        let i1 = i0 | mask;
        let (a0, a1) = (amps[i0], amps[i1]);
        amps[i0] = ZERO + m[(0, 0)] * a0 + m[(0, 1)] * a1;
        amps[i1] = ZERO + m[(1, 0)] * a0 + m[(1, 1)] * a1;
    }
}

fn kernel_subset(amps: &mut [C64], n: usize, u: &CMatrix, qubits: &[usize]) {
    let k = qubits.len();
    let dim = 1usize << k;
    let masks: Vec<usize> = qubits.iter().map(|&q| qubit_mask(n, q)).collect();
    let all_mask: usize = masks.iter().sum();
    // offsets[s] = full-register bits for sub-index s (first qubit = MSB)
    let offsets: Vec<usize> = (0..dim)
        .map(|s| {
            masks
                .iter()
                .enumerate()
                .filter(|(pos, _)| s & (1 << (k - 1 - pos)) != 0)
                .map(|(_, m)| m)
                .sum()
        })
        .collect();
    let mut gathered = vec![ZERO; dim];
    for base in 0..amps.len() {
        if base & all_mask != 0 {
            continue;
        }
        for (g, off) in gathered.iter_mut().zip(&offsets) {
            *g = amps[base | off];
        }
        for (row, off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (col, g) in gathered.iter().enumerate() {
                acc += u[(row, col)] * g;
            }
            amps[base | off] = acc;
        }
    }
}

fn kernel_gate(amps: &mut [C64], n: usize, gate: &GateOp) {
    match gate {
        GateOp::Single { target, matrix } => kernel_single(amps, n, *target, matrix, 0),
        GateOp::Controlled {
            controls,
            target,
            matrix,
        } => {
            let ctrl = controls.iter().map(|&c| qubit_mask(n, c)).sum();
            kernel_single(amps, n, *target, matrix, ctrl)
        }
        GateOp::Unitary { qubits, matrix } => kernel_subset(amps, n, matrix, qubits),
    }
}

/// Dense pure state over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(SimError::DimensionMismatch {
                expected: dim,
                got: index,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Builds a state from amplitudes that must already be normalised.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(SimError::DimensionMismatch {
                expected: dim.next_power_of_two().max(2),
                got: dim,
            });
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n_qubits));
        }
        let s = Self { n_qubits, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Normalises arbitrary nonzero amplitudes.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(SimError::NotNormalized(norm));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amps)
    }

    /// Product state from a label such as `"0+1-"`; each character is one of
    /// `0`, `1`, `+`, `-`.
    pub fn from_label(label: &str) -> Result<Self> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let factors = label
            .chars()
            .map(|c| match c {
                '0' => Ok([ONE, ZERO]),
                '1' => Ok([ZERO, ONE]),
                '+' => Ok([C64::new(s, 0.0), C64::new(s, 0.0)]),
                '-' => Ok([C64::new(s, 0.0), C64::new(-s, 0.0)]),
                _ => Err(SimError::InvalidLabel(label.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        if factors.is_empty() {
            return Err(SimError::InvalidLabel(label.to_string()));
        }
        Self::product(&factors)
    }

    /// Tensor product of single-qubit states, qubit 1 first.
    pub fn product(factors: &[[C64; 2]]) -> Result<Self> {
        let mut amps = vec![ONE];
        for f in factors {
            amps = amps
                .iter()
                .flat_map(|a| [a * f[0], a * f[1]])
                .collect();
        }
        Self::normalized(amps)
    }

    /// Haar-random state.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        let amps = (0..1usize << n_qubits)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply_gate(&self, gate: &GateOp) -> Result<Self> {
        gate.validate(self.n_qubits)?;
        let mut out = self.clone();
        kernel_gate(&mut out.amps, self.n_qubits, gate);
        Ok(out)
    }

    pub fn apply_circuit(&self, circuit: &[GateOp]) -> Result<Self> {
        for g in circuit {
            g.validate(self.n_qubits)?;
        }
        let mut out = self.clone();
        for g in circuit {
            kernel_gate(&mut out.amps, self.n_qubits, g);
        }
        Ok(out)
    }

    pub fn apply_unitary_subset(&self, u: &CMatrix, qubits: &[usize]) -> Result<Self> {
        validate_subset(self.n_qubits, u, qubits)?;
        let mut out = self.clone();
        kernel_subset(&mut out.amps, self.n_qubits, u, qubits);
        Ok(out)
    }

    /// Skips validation; `u` must be a known-good unitary on distinct qubits.
    pub(crate) fn apply_trusted_unitary(&self, u: &CMatrix, qubits: &[usize]) -> Self {
        let mut out = self.clone();
        kernel_subset(&mut out.amps, self.n_qubits, u, qubits);
        out
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(SimError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Self::from_amplitudes(amps)
    }

    /// Number of Schmidt coefficients above `tol` across the cut
    /// `side` | complement.
    pub fn schmidt_rank(&self, side: &[usize], tol: f64) -> Result<usize> {
        check_distinct(self.n_qubits, side)?;
        let rest: Vec<usize> = (1..=self.n_qubits).filter(|q| !side.contains(q)).collect();
        if side.is_empty() || rest.is_empty() {
            return Err(SimError::EmptyQubitList);
        }
        let rows = offsets_for(self.n_qubits, side);
        let cols = offsets_for(self.n_qubits, &rest);
        let m = CMatrix::from_fn(rows.len(), cols.len(), |r, c| self.amps[rows[r] | cols[c]]);
        let sv = m.singular_values();
        Ok(sv.iter().filter(|&&s| s > tol).count())
    }

    pub fn to_density(&self) -> MixedState {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        MixedState {
            n_qubits: self.n_qubits,
            matrix: &v * v.adjoint(),
        }
    }

    /// Equality up to one global phase, elementwise within `tol`.
    pub fn approx_eq_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let Ok(ov) = self.overlap(other) else {
            return false;
        };
        if ov.norm() < 1e-300 {
            return self.amps.iter().chain(&other.amps).all(|a| a.norm() <= tol);
        }
        let phase = ov / ov.norm();
        self.amps
            .iter()
            .zip(&other.amps)
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }
}

/// Full-register bit patterns for every sub-index over `qubits`
/// (first listed qubit is the most significant sub-index bit).
pub(crate) fn offsets_for(n_qubits: usize, qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|s| {
            qubits
                .iter()
                .enumerate()
                .filter(|(pos, _)| s & (1 << (k - 1 - pos)) != 0)
                .map(|(_, &q)| qubit_mask(n_qubits, q))
                .sum()
        })
        .collect()
}

/// Dense density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    n_qubits: usize,
    matrix: CMatrix,
}

impl MixedState {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(SimError::DimensionMismatch {
                expected: dim.next_power_of_two().max(2),
                got: matrix.ncols(),
            });
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n_qubits));
        }
        let dim = 1usize << n_qubits;
        Self::from_matrix(CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().collect()
    }

    /// Hermitian, unit trace and positive semidefinite at the module tolerances.
    pub fn is_valid(&self) -> bool {
        self.hermiticity_defect() <= ALGEBRAIC_TOL
            && (self.trace() - ONE).norm() <= ALGEBRAIC_TOL
            && self.eigenvalues().iter().all(|&e| e >= -1e-10)
    }

    pub fn apply_gate(&self, gate: &GateOp) -> Result<Self> {
        gate.validate(self.n_qubits)?;
        Ok(self.conjugate_with(|amps| kernel_gate(amps, self.n_qubits, gate)))
    }

    pub fn apply_unitary_subset(&self, u: &CMatrix, qubits: &[usize]) -> Result<Self> {
        validate_subset(self.n_qubits, u, qubits)?;
        Ok(self.conjugate_with(|amps| kernel_subset(amps, self.n_qubits, u, qubits)))
    }

    pub(crate) fn apply_trusted_unitary(&self, u: &CMatrix, qubits: &[usize]) -> Self {
        self.conjugate_with(|amps| kernel_subset(amps, self.n_qubits, u, qubits))
    }

    /// `U ρ U†` where `apply` applies `U` to a column vector in place.
    fn conjugate_with<F: Fn(&mut [C64])>(&self, apply: F) -> Self {
        let dim = self.dim();
        // U ρ, column by column
        let mut m = self.matrix.clone();
        for mut col in m.column_iter_mut() {
            apply(col.as_mut_slice());
        }
        // (U (Uρ)†)† = U ρ U†
        let mut m = m.adjoint();
        for mut col in m.column_iter_mut() {
            apply(col.as_mut_slice());
        }
        debug_assert_eq!(m.nrows(), dim);
        Self {
            n_qubits: self.n_qubits,
            matrix: m.adjoint(),
        }
    }

    /// `Σ_k K_k ρ K_k†` with single-qubit Kraus operators on qubit `q`.
    pub fn apply_kraus(&self, q: usize, kraus: &[Matrix2<C64>]) -> Result<Self> {
        check_qubit(self.n_qubits, q)?;
        let mut acc = CMatrix::zeros(self.dim(), self.dim());
        for k in kraus {
            let part = self.conjugate_with(|amps| kernel_single(amps, self.n_qubits, q, k, 0));
            acc += part.matrix;
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: acc,
        })
    }

    /// Reduced density operator on `keep`, in the listed order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(SimError::EmptyQubitList);
        }
        check_distinct(self.n_qubits, keep)?;
        let traced: Vec<usize> = (1..=self.n_qubits).filter(|q| !keep.contains(q)).collect();
        let kept = offsets_for(self.n_qubits, keep);
        let env = if traced.is_empty() {
            vec![0]
        } else {
            offsets_for(self.n_qubits, &traced)
        };
        let m = CMatrix::from_fn(kept.len(), kept.len(), |r, c| {
            env.iter()
                .map(|e| self.matrix[(kept[r] | e, kept[c] | e)])
                .sum()
        });
        Self::from_matrix(m)
    }

    /// Trace distance `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &MixedState) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(SimError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let diff = &self.matrix - &other.matrix;
        let herm = (&diff + diff.adjoint()) * C64::new(0.5, 0.0);
        Ok(0.5 * herm.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with_pure(&self, psi: &PureState) -> Result<f64> {
        if self.dim() != psi.dim() {
            return Err(SimError::DimensionMismatch {
                expected: self.dim(),
                got: psi.dim(),
            });
        }
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Ok((v.adjoint() * &self.matrix * &v)[(0, 0)].re)
    }

    /// `γ ρ + (1 − γ) I/d`: every coherence is scaled by `γ`.
    pub fn depolarize(&self, retained: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&retained) {
            return Err(SimError::OutOfRange {
                name: "depolarizing retention",
                value: retained,
            });
        }
        let dim = self.dim();
        let mixed = CMatrix::identity(dim, dim) * C64::new((1.0 - retained) / dim as f64, 0.0);
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * C64::new(retained, 0.0) + mixed,
        })
    }
}
