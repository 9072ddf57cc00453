//! NMR spin model, T2 dephasing during the correction cycle, and free
//! induction decay spectra.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::code552::{CodeSpec, N_QUBITS};
use crate::error_model::{error_unitary, ErrorSpec};
use crate::statevec::{qubit_mask, GateOp, MixedState, PureState};
use crate::{CMatrix, Result, SimError, C64};

const MAX_SPINS: usize = 10;

/// Chemical shifts, couplings and relaxation times of a spin system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmrSystem {
    /// Chemical shifts ν_i in Hz.
    pub nu: Vec<f64>,
    /// Symmetric scalar couplings J_ij in Hz.
    #[serde(rename = "J")]
    pub j: Vec<Vec<f64>>,
    #[serde(rename = "T1")]
    pub t1: Vec<f64>,
    #[serde(rename = "T2")]
    pub t2: Vec<f64>,
    #[serde(rename = "T2star")]
    pub t2_star: Vec<f64>,
}

impl NmrSystem {
    pub fn n_spins(&self) -> usize {
        self.nu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_spins();
        if n == 0 {
            return Err(SimError::InvalidSystem("no spins".into()));
        }
        if n > MAX_SPINS {
            return Err(SimError::TooManyQubits(n));
        }
        for (name, v) in [("T1", &self.t1), ("T2", &self.t2), ("T2star", &self.t2_star)] {
            if v.len() != n {
                return Err(SimError::InvalidSystem(format!("{name} has {} entries, expected {n}", v.len())));
            }
            if v.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                return Err(SimError::InvalidSystem(format!("{name} must be positive")));
            }
        }
        if self.j.len() != n || self.j.iter().any(|r| r.len() != n) {
            return Err(SimError::InvalidSystem(format!("J must be {n}×{n}")));
        }
        for a in 0..n {
            if self.j[a][a] != 0.0 {
                return Err(SimError::InvalidSystem("J diagonal must be zero".into()));
            }
            for b in 0..a {
                if self.j[a][b] != self.j[b][a] {
                    return Err(SimError::InvalidSystem(format!("J[{a}][{b}] != J[{b}][{a}]")));
                }
            }
        }
        Ok(())
    }

    /// Energies `⟨k|H|k⟩` of the diagonal Hamiltonian, rad/s.
    pub fn energies(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.n_spins();
        let z = |k: usize, i: usize| if k & qubit_mask(n, i + 1) == 0 { 1.0 } else { -1.0 };
        Ok((0..1usize << n)
            .map(|k| {
                let mut e = 0.0;
                for i in 0..n {
                    e += PI * self.nu[i] * z(k, i);
                    for jdx in i + 1..n {
                        e += 0.5 * PI * self.j[i][jdx] * z(k, i) * z(k, jdx);
                    }
                }
                e
            })
            .collect())
    }

    /// Line frequencies (Hz) of spin `observe`, one per configuration of the
    /// other spins.
    fn line_frequencies(&self, observe: usize) -> Vec<f64> {
        let n = self.n_spins();
        let others: Vec<usize> = (0..n).filter(|&i| i != observe - 1).collect();
        (0..1usize << others.len())
            .map(|cfg| {
                let shift: f64 = others
                    .iter()
                    .enumerate()
                    .map(|(pos, &i)| {
                        let z = if cfg & (1 << pos) == 0 { 1.0 } else { -1.0 };
                        0.5 * self.j[observe - 1][i] * z
                    })
                    .sum();
                self.nu[observe - 1] + shift
            })
            .collect()
    }
}

/// `Σ π ν_i Z_i + Σ_{i<j} (π/2) J_ij Z_i Z_j` (ħ = 1).
pub fn hamiltonian(sys: &NmrSystem) -> Result<CMatrix> {
    let e = sys.energies()?;
    Ok(CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        e.len(),
        e.iter().map(|&x| C64::new(x, 0.0)),
    )))
}

/// Kraus pair `√(1−λ/2) I`, `√(λ/2) Z`.
pub fn dephasing_kraus(lambda: f64) -> Result<[Matrix2<C64>; 2]> {
    check_unit("lambda", lambda)?;
    let a = C64::new((1.0 - lambda / 2.0).sqrt(), 0.0);
    let b = C64::new((lambda / 2.0).sqrt(), 0.0);
    Ok([
        Matrix2::identity() * a,
        Matrix2::new(b, C64::default(), C64::default(), -b),
    ])
}

/// Amplitude-damping pair with decay probability `gamma`.
pub fn amplitude_damping_kraus(gamma: f64) -> Result<[Matrix2<C64>; 2]> {
    check_unit("gamma", gamma)?;
    let z = C64::default();
    Ok([
        Matrix2::new(C64::new(1.0, 0.0), z, z, C64::new((1.0 - gamma).sqrt(), 0.0)),
        Matrix2::new(z, C64::new(gamma.sqrt(), 0.0), z, z),
    ])
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(SimError::OutOfRange { name, value });
    }
    Ok(())
}

/// `ρ → (1 − λ/2) ρ + (λ/2) Z_q ρ Z_q`; off-diagonals in qubit `q` shrink by `1 − λ`.
pub fn apply_dephasing(state: &MixedState, qubit: usize, lambda: f64) -> Result<MixedState> {
    state.apply_kraus(qubit, &dephasing_kraus(lambda)?)
}

pub fn apply_amplitude_damping(state: &MixedState, qubit: usize, gamma: f64) -> Result<MixedState> {
    state.apply_kraus(qubit, &amplitude_damping_kraus(gamma)?)
}

/// Stage of the correction cycle after which noise is inserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Encode,
    Error,
    Decode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledSegment {
    pub segment: Segment,
    /// Seconds.
    pub duration: f64,
}

/// Per-qubit dephasing over a segment schedule, plus optional amplitude
/// damping and a global coherence-retention factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// T2 per qubit, seconds.
    #[serde(rename = "T2")]
    pub t2: Vec<f64>,
    /// T1 per qubit; only used when `amplitude_damping` is set.
    #[serde(rename = "T1", default)]
    pub t1: Option<Vec<f64>>,
    pub schedule: Vec<ScheduledSegment>,
    #[serde(default)]
    pub amplitude_damping: bool,
    /// `γ` in `ρ → γρ + (1−γ) I/d`, applied once at the end of the cycle.
    #[serde(default)]
    pub depolarizing: Option<f64>,
}

/// Default total duration of the correction cycle, seconds.
pub const DEFAULT_TOTAL_DURATION: f64 = 0.65;

impl NoiseModel {
    /// Placeholder profile: T2 in [0.8, 1.1] s, T1 = 3 s, 0.65 s split
    /// 6 : 1 : 6 over encode / error / decode.
    pub fn default_profile() -> Self {
        let unit = DEFAULT_TOTAL_DURATION / 13.0;
        Self {
            t2: vec![0.85, 1.05, 0.95, 1.10, 0.80],
            t1: Some(vec![3.0; N_QUBITS]),
            schedule: vec![
                ScheduledSegment { segment: Segment::Encode, duration: 6.0 * unit },
                ScheduledSegment { segment: Segment::Error, duration: unit },
                ScheduledSegment { segment: Segment::Decode, duration: 6.0 * unit },
            ],
            amplitude_damping: false,
            depolarizing: None,
        }
    }

    /// No dephasing; every coherence of the final state is scaled by `gamma`.
    pub fn uniform_coherence(gamma: f64) -> Self {
        Self {
            t2: vec![1.0; N_QUBITS],
            t1: None,
            schedule: [Segment::Encode, Segment::Error, Segment::Decode]
                .into_iter()
                .map(|segment| ScheduledSegment { segment, duration: 0.0 })
                .collect(),
            amplitude_damping: false,
            depolarizing: Some(gamma),
        }
    }

    /// Same schedule shape with every T2 equal to `t2` and all durations
    /// scaled to `total` seconds.
    pub fn uniform_dephasing(t2: f64, total: f64) -> Self {
        let mut m = Self::default_profile();
        m.t2 = vec![t2; N_QUBITS];
        let sum: f64 = m.schedule.iter().map(|s| s.duration).sum();
        m.schedule.iter_mut().for_each(|s| s.duration *= total / sum);
        m
    }

    pub fn validate(&self) -> Result<()> {
        if self.t2.len() != N_QUBITS || self.t2.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(SimError::Schedule(format!("T2 must list {N_QUBITS} positive times")));
        }
        if self.amplitude_damping {
            match &self.t1 {
                Some(t1) if t1.len() == N_QUBITS && t1.iter().all(|t| t.is_finite() && *t > 0.0) => {}
                _ => return Err(SimError::Schedule(format!("T1 must list {N_QUBITS} positive times"))),
            }
        }
        for seg in [Segment::Encode, Segment::Error, Segment::Decode] {
            let count = self.schedule.iter().filter(|s| s.segment == seg).count();
            if count != 1 {
                return Err(SimError::Schedule(format!("segment {seg:?} appears {count} times")));
            }
        }
        if self.schedule.iter().any(|s| !(s.duration.is_finite() && s.duration >= 0.0)) {
            return Err(SimError::Schedule("durations must be non-negative".into()));
        }
        if let Some(g) = self.depolarizing {
            check_unit("depolarizing", g)?;
        }
        Ok(())
    }

    pub fn duration(&self, seg: Segment) -> f64 {
        self.schedule
            .iter()
            .find(|s| s.segment == seg)
            .map_or(0.0, |s| s.duration)
    }

    /// `λ_q = 1 − exp(−t / T2_q)` for the given segment.
    pub fn lambdas(&self, seg: Segment) -> Vec<f64> {
        let t = self.duration(seg);
        self.t2.iter().map(|t2| 1.0 - (-t / t2).exp()).collect()
    }

    fn relax(&self, mut rho: MixedState, seg: Segment) -> Result<MixedState> {
        let t = self.duration(seg);
        if t == 0.0 {
            return Ok(rho);
        }
        for (i, lambda) in self.lambdas(seg).into_iter().enumerate() {
            rho = apply_dephasing(&rho, i + 1, lambda)?;
        }
        if self.amplitude_damping {
            if let Some(t1) = &self.t1 {
                for (i, t1) in t1.iter().enumerate() {
                    rho = apply_amplitude_damping(&rho, i + 1, 1.0 - (-t / t1).exp())?;
                }
            }
        }
        Ok(rho)
    }
}

/// Encode → relax → error → relax → decode → relax (→ depolarize).
/// `register` is the three-qubit logical input.
pub fn run_noisy_qecc(
    code: &CodeSpec,
    register: &PureState,
    error: &ErrorSpec,
    model: &NoiseModel,
) -> Result<MixedState> {
    model.validate()?;
    let u = error_unitary(error)?;
    let all: Vec<usize> = (1..=N_QUBITS).collect();

    let rho = code.encode(register)?.to_density();
    let rho = model.relax(rho, Segment::Encode)?;
    let rho = rho.apply_gate(&GateOp::single(error.location, u))?;
    let rho = model.relax(rho, Segment::Error)?;
    let rho = match code.is_trusted() {
        true => rho.apply_trusted_unitary(code.decoder(error.location)?, &all),
        false => rho.apply_unitary_subset(code.decoder(error.location)?, &all)?,
    };
    let rho = model.relax(rho, Segment::Decode)?;
    match model.depolarizing {
        Some(g) => rho.depolarize(g),
        None => Ok(rho),
    }
}

/// Noiseless pipeline: decode(ℰ_q encode(register)).
pub fn run_pure_qecc(code: &CodeSpec, register: &PureState, error: &ErrorSpec) -> Result<PureState> {
    let u = error_unitary(error)?;
    let corrupted = code.encode(register)?.apply_gate(&GateOp::single(error.location, u))?;
    code.decode(&corrupted, error.location)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    /// Hz.
    pub frequency: f64,
    pub value: C64,
}

impl SpectrumPoint {
    pub fn magnitude(&self) -> f64 {
        self.value.norm()
    }
}

/// Fourier transform of `M(t) = Tr[ρ(t)(X_j + iY_j)] e^{−t/T2*_j}` sampled
/// at `t = 0, dt, …` up to `t_max`. Frequencies are returned in increasing
/// order; amplitudes are normalised by the sample count.
pub fn simulate_spectrum(
    state: &MixedState,
    sys: &NmrSystem,
    observe: usize,
    t_max: f64,
    dt: f64,
) -> Result<Vec<SpectrumPoint>> {
    let energies = sys.energies()?;
    let n = sys.n_spins();
    if state.n_qubits() != n {
        return Err(SimError::DimensionMismatch {
            expected: 1 << n,
            got: state.dim(),
        });
    }
    if observe == 0 || observe > n {
        return Err(SimError::QubitOutOfRange { index: observe, n_qubits: n });
    }
    if !(dt > 0.0 && t_max > dt) {
        return Err(SimError::InvalidSystem(format!("need 0 < dt < t_max (dt={dt}, t_max={t_max})")));
    }
    let nyquist = 0.5 / dt;
    if let Some(f) = sys
        .line_frequencies(observe)
        .into_iter()
        .find(|f| f.abs() >= nyquist)
    {
        return Err(SimError::Aliasing { dt, frequency: f, nyquist });
    }

    // X + iY = 2|0⟩⟨1|, so M(t) = 2 Σ ρ_ab(t) with a having the observed
    // bit set and b = a with it cleared.
    let mask = qubit_mask(n, observe);
    let coherences: Vec<(C64, f64)> = (0..state.dim())
        .filter(|a| a & mask != 0)
        .map(|a| {
            let b = a ^ mask;
            (state.element(a, b) * 2.0, energies[a] - energies[b])
        })
        .filter(|(c, _)| c.norm() > 0.0)
        .collect();

    let samples = (t_max / dt).round() as usize;
    let t2s = sys.t2_star[observe - 1];
    let mut fid: Vec<C64> = (0..samples)
        .map(|k| {
            let t = k as f64 * dt;
            let m: C64 = coherences
                .iter()
                .map(|(c, de)| c * C64::from_polar(1.0, -de * t))
                .sum();
            m * (-t / t2s).exp()
        })
        .collect();

    FftPlanner::new().plan_fft_forward(samples).process(&mut fid);
    let scale = 1.0 / samples as f64;
    let df = 1.0 / (samples as f64 * dt);
    let half = samples / 2;
    Ok((0..samples)
        .map(|m| {
            let signed = m as isize - half as isize;
            let k = signed.rem_euclid(samples as isize) as usize;
            SpectrumPoint {
                frequency: signed as f64 * df,
                value: fid[k] * scale,
            }
        })
        .collect())
}

/// Local maxima of the magnitude spectrum above `threshold` × global maximum.
pub fn find_peaks(spectrum: &[SpectrumPoint], threshold: f64) -> Vec<SpectrumPoint> {
    let max = spectrum.iter().map(SpectrumPoint::magnitude).fold(0.0, f64::max);
    spectrum
        .windows(3)
        .filter(|w| {
            let m = w[1].magnitude();
            m >= threshold * max && m > w[0].magnitude() && m >= w[2].magnitude()
        })
        .map(|w| w[1])
        .collect()
}

/// A two-spin example system (placeholder values, not a molecule).
pub fn demo_two_spin() -> NmrSystem {
    NmrSystem {
        nu: vec![50.0, -120.0],
        j: vec![vec![0.0, 7.0], vec![7.0, 0.0]],
        t1: vec![3.0, 3.0],
        t2: vec![1.0, 1.0],
        t2_star: vec![0.5, 0.5],
    }
}

/// A five-spin example system with nearest-neighbour couplings (placeholder
/// values, not measured shifts).
pub fn demo_five_spin() -> NmrSystem {
    let nu = vec![-180.0, 120.0, -60.0, 30.0, 200.0];
    let mut j = vec![vec![0.0; 5]; 5];
    for (a, b, v) in [(0, 1, 12.0), (1, 2, 72.0), (2, 3, 41.0), (3, 4, 60.0), (0, 4, 7.0), (0, 3, 9.0)] {
        j[a][b] = v;
        j[b][a] = v;
    }
    NmrSystem {
        nu,
        j,
        t1: vec![3.0; 5],
        t2: vec![0.85, 1.05, 0.95, 1.10, 0.80],
        t2_star: vec![0.4; 5],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code552::build_code;
    use crate::error_model::ErrorType;
    use approx::assert_abs_diff_eq;

    fn plus() -> MixedState {
        PureState::from_label("+").unwrap().to_density()
    }

    #[test]
    fn hamiltonian_examples() {
        let one = NmrSystem {
            nu: vec![100.0],
            j: vec![vec![0.0]],
            t1: vec![1.0],
            t2: vec![1.0],
            t2_star: vec![1.0],
        };
        let h = hamiltonian(&one).unwrap();
        assert_abs_diff_eq!(h[(0, 0)].re, 100.0 * PI);
        assert_abs_diff_eq!(h[(1, 1)].re, -100.0 * PI);

        let mut two = demo_two_spin();
        two.nu = vec![0.0, 0.0];
        two.j = vec![vec![0.0, 10.0], vec![10.0, 0.0]];
        let h = hamiltonian(&two).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| h[(i, i)].re).collect();
        for (got, want) in diag.iter().zip([5.0 * PI, -5.0 * PI, -5.0 * PI, 5.0 * PI]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        // diagonal, hence commutes with every Z_i
        assert!(h.iter().enumerate().all(|(k, z)| k % 5 == 0 || *z == C64::default()));
    }

    #[test]
    fn system_validation() {
        let mut s = demo_two_spin();
        s.j[0][1] = 3.0;
        assert!(s.validate().is_err());
        let mut s = demo_two_spin();
        s.t2[1] = 0.0;
        assert!(s.validate().is_err());
        let mut s = demo_two_spin();
        s.nu = vec![0.0; 11];
        assert!(s.validate().is_err());
    }

    #[test]
    fn dephasing_examples() {
        let rho = apply_dephasing(&plus(), 1, 0.0).unwrap();
        assert_eq!(rho, plus());

        let rho = apply_dephasing(&plus(), 1, 1.0).unwrap();
        assert_abs_diff_eq!(rho.element(0, 1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.element(0, 0).re, 0.5, epsilon = 1e-15);

        let lambda = 1.0 - (-0.6f64 / 0.9).exp();
        let rho = apply_dephasing(&plus(), 1, lambda).unwrap();
        assert_abs_diff_eq!(rho.element(0, 1).re, 0.5 * (-0.6f64 / 0.9).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-12);

        assert!(apply_dephasing(&plus(), 1, -0.1).is_err());
        assert!(apply_dephasing(&plus(), 1, 1.1).is_err());
    }

    #[test]
    fn kraus_completeness() {
        for k in [dephasing_kraus(0.37).unwrap(), amplitude_damping_kraus(0.37).unwrap()] {
            let sum = k.iter().fold(Matrix2::zeros(), |acc, m| acc + m.adjoint() * m);
            assert!((sum - Matrix2::identity()).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn dephasing_commutes_with_z_rotation() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
        let rho = PureState::random(3, &mut rng).unwrap().to_density();
        let rz = GateOp::rotation(2, [0.0, 0.0, 1.0], 0.77);
        let a = apply_dephasing(&rho.apply_gate(&rz).unwrap(), 2, 0.4).unwrap();
        let b = apply_dephasing(&rho, 2, 0.4).unwrap().apply_gate(&rz).unwrap();
        assert!((a.matrix() - b.matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn zero_duration_matches_pure_pipeline() {
        let code = build_code().unwrap();
        let reg = PureState::from_label("01+").unwrap();
        let err = ErrorSpec::rotation(3, ErrorType::Y, 0.9);
        let mut model = NoiseModel::default_profile();
        model.schedule.iter_mut().for_each(|s| s.duration = 0.0);
        let rho = run_noisy_qecc(&code, &reg, &err, &model).unwrap();
        let pure = run_pure_qecc(&code, &reg, &err).unwrap().to_density();
        assert!(rho.trace_distance(&pure).unwrap() < 1e-10);
    }

    #[test]
    fn schedule_mismatch_rejected() {
        let code = build_code().unwrap();
        let reg = PureState::from_label("000").unwrap();
        let mut model = NoiseModel::default_profile();
        model.schedule.pop();
        assert!(matches!(
            run_noisy_qecc(&code, &reg, &ErrorSpec::identity(1), &model),
            Err(SimError::Schedule(_))
        ));
    }

    #[test]
    fn noisy_output_is_a_state() {
        let code = build_code().unwrap();
        let reg = PureState::from_label("01+").unwrap();
        let mut model = NoiseModel::default_profile();
        model.amplitude_damping = true;
        let rho = run_noisy_qecc(&code, &reg, &ErrorSpec::rotation(2, ErrorType::X, 1.0), &model).unwrap();
        assert!(rho.is_valid());
        assert!(rho.purity() < 1.0 - 1e-3);
    }

    #[test]
    fn single_spin_peak() {
        let sys = NmrSystem {
            nu: vec![50.0],
            j: vec![vec![0.0]],
            t1: vec![1.0],
            t2: vec![1.0],
            t2_star: vec![0.5],
        };
        let spec = simulate_spectrum(&plus(), &sys, 1, 4.0, 1.0 / 400.0).unwrap();
        let peaks = find_peaks(&spec, 0.5);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].frequency - 50.0).abs() <= 0.25);
    }

    #[test]
    fn aliasing_rejected() {
        let sys = demo_two_spin();
        let rho = PureState::from_label("+0").unwrap().to_density();
        assert!(matches!(
            simulate_spectrum(&rho, &sys, 1, 1.0, 0.02),
            Err(SimError::Aliasing { .. })
        ));
    }
}
