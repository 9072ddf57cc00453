//! Benchmark protocol: three input states, Pauli and rotation errors, the
//! peak amplitudes `A0`/`A1`, θ sweeps and their fits.
//!
//! Each input `|s_k⟩` keeps exactly one register qubit in `|+⟩`. Its
//! coherence, conditioned on a syndrome value `|jl⟩`, is what a spectrometer
//! would read as one line of that qubit's multiplet. The amplitude of a
//! branch is the density-matrix element
//! `⟨j r0 l|ρ|j r1 l⟩ / ⟨r0|s_k⟩⟨s_k|r1⟩`, where `r0`/`r1` are the register
//! strings with the coherent qubit in `0`/`1`. Noiselessly this equals the
//! branch population `|c_jl|²`; under noise it tracks the surviving
//! coherence.

pub mod fit;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::code552::{output_index, CodeSpec, N_QUBITS};
use crate::error_model::{ErrorSpec, ErrorType, Pauli, Syndrome};
use crate::nmr_noise::{run_noisy_qecc, run_pure_qecc, NoiseModel};
use crate::parallel::Execution;
use crate::statevec::{MixedState, PureState};
use crate::{Result, SimError, C64};

pub use fit::{fit_constant, fit_line, fit_scale, Estimate, LineFit};

/// Which of the three benchmark inputs `|0⟩|s_k⟩|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InputStateId {
    /// `|+⟩|00⟩`
    K1,
    /// `|01⟩|+⟩`
    K2,
    /// `|00⟩|+⟩`
    K3,
}

impl InputStateId {
    pub const ALL: [InputStateId; 3] = [InputStateId::K1, InputStateId::K2, InputStateId::K3];

    pub fn k(self) -> u8 {
        match self {
            InputStateId::K1 => 1,
            InputStateId::K2 => 2,
            InputStateId::K3 => 3,
        }
    }

    pub fn from_k(k: u8) -> Result<Self> {
        match k {
            1 => Ok(InputStateId::K1),
            2 => Ok(InputStateId::K2),
            3 => Ok(InputStateId::K3),
            _ => Err(SimError::InvalidLabel(format!("input k={k}"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            InputStateId::K1 => "+00",
            InputStateId::K2 => "01+",
            InputStateId::K3 => "00+",
        }
    }

    /// Three-qubit register state `|s_k⟩`.
    pub fn register_state(self) -> PureState {
        PureState::from_label(self.label()).expect("static label")
    }

    /// Register indices `(r0, r1)` of the protected coherence.
    pub fn coherence_pair(self) -> (usize, usize) {
        match self {
            InputStateId::K1 => (0b000, 0b100),
            InputStateId::K2 => (0b010, 0b011),
            InputStateId::K3 => (0b000, 0b001),
        }
    }
}

/// Signed peak amplitudes and their absolute-value summaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    /// In-phase (real) part of the no-error branch amplitude.
    pub a0: f64,
    /// In-phase part of the error branch amplitude.
    pub a1: f64,
    pub i0: f64,
    pub i1: f64,
    pub i: f64,
}

impl Observables {
    fn from_complex(a0: C64, a1: C64) -> Self {
        Self {
            a0: a0.re,
            a1: a1.re,
            i0: a0.norm(),
            i1: a1.norm(),
            i: (a0 + a1).norm(),
        }
    }
}

/// `Θ = 2 atan2(√I1, √I0)`, in `[0, π]`.
pub fn estimate_theta(obs: &Observables) -> Result<f64> {
    let total = obs.i0 + obs.i1;
    if total.is_nan() || total <= 0.0 {
        return Err(SimError::ZeroSignal);
    }
    Ok(2.0 * obs.i1.sqrt().atan2(obs.i0.sqrt()))
}

enum Output {
    Pure(PureState),
    Mixed(MixedState),
}

impl Output {
    fn element(&self, a: usize, b: usize) -> C64 {
        match self {
            Output::Pure(s) => s.amplitude(a) * s.amplitude(b).conj(),
            Output::Mixed(m) => m.element(a, b),
        }
    }

    fn into_mixed(self) -> MixedState {
        match self {
            Output::Pure(s) => s.to_density(),
            Output::Mixed(m) => m,
        }
    }
}

fn run_pipeline(
    code: &CodeSpec,
    register: &PureState,
    error: &ErrorSpec,
    noise: Option<&NoiseModel>,
) -> Result<Output> {
    Ok(match noise {
        None => Output::Pure(run_pure_qecc(code, register, error)?),
        Some(model) => Output::Mixed(run_noisy_qecc(code, register, error, model)?),
    })
}

/// Syndromes whose branches count toward `A1`: the single branch of a
/// coordinate-axis error, otherwise all three nontrivial branches.
fn error_branches(error: &ErrorSpec) -> Vec<Syndrome> {
    match error.error_type() {
        Some(t) => vec![t.pauli().syndrome()],
        None => [Pauli::X, Pauli::Z, Pauli::Y].iter().map(|p| p.syndrome()).collect(),
    }
}

fn branch_amplitude(out: &Output, input: InputStateId, s: Syndrome) -> C64 {
    let (r0, r1) = input.coherence_pair();
    // ⟨r0|s_k⟩⟨s_k|r1⟩ = 1/2 for every input
    out.element(output_index(s, r0), output_index(s, r1)) / 0.5
}

fn observables(out: &Output, input: InputStateId, error: &ErrorSpec) -> Observables {
    let a0 = branch_amplitude(out, input, Pauli::E.syndrome());
    let a1 = error_branches(error)
        .into_iter()
        .map(|s| branch_amplitude(out, input, s))
        .sum();
    Observables::from_complex(a0, a1)
}

/// One encode → error → decode run and its observables.
pub fn run_point(
    code: &CodeSpec,
    input: InputStateId,
    error: &ErrorSpec,
    noise: Option<&NoiseModel>,
) -> Result<Observables> {
    let out = run_pipeline(code, &input.register_state(), error, noise)?;
    Ok(observables(&out, input, error))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    A,
    B,
    C,
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Setting::A => "A",
            Setting::B => "B",
            Setting::C => "C",
        };
        f.write_str(c)
    }
}

impl FromStr for Setting {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Setting::A),
            "B" => Ok(Setting::B),
            "C" => Ok(Setting::C),
            _ => Err(SimError::InvalidLabel(s.to_string())),
        }
    }
}

/// One row of the Pauli-error table.
#[derive(Debug, Clone, Serialize)]
pub struct PauliRow {
    pub location: usize,
    pub pauli: Pauli,
    /// Most populated syndrome after decoding.
    pub branch: Syndrome,
    pub expected: Syndrome,
    /// `⟨s_2|ρ_register|s_2⟩`.
    pub fidelity: f64,
    pub observables: Observables,
}

impl PauliRow {
    pub fn pass(&self) -> bool {
        self.branch == self.expected
    }
}

/// Pauli errors `E, X, Z, Y` on every qubit with input `|ψ_2⟩`.
pub fn run_setting_a(code: &CodeSpec, noise: Option<&NoiseModel>, exec: Execution) -> Result<Vec<PauliRow>> {
    let cases: Vec<(usize, Pauli)> = (1..=N_QUBITS)
        .flat_map(|q| [Pauli::E, Pauli::Z, Pauli::X, Pauli::Y].map(|p| (q, p)))
        .collect();
    let input = InputStateId::K2;
    let target = input.register_state();
    exec.map(&cases, |&(location, pauli)| {
        let error = ErrorSpec::pauli(location, pauli);
        let out = run_pipeline(code, &target, &error, noise)?;
        let observables = observables(&out, input, &error);
        let rho = out.into_mixed();
        let syn = rho.partial_trace(&[1, 5])?;
        let branch = (0..4u8)
            .max_by(|&a, &b| {
                syn.element(a as usize, a as usize)
                    .re
                    .total_cmp(&syn.element(b as usize, b as usize).re)
            })
            .map(Syndrome)
            .expect("four branches");
        let fidelity = rho.partial_trace(&[2, 3, 4])?.fidelity_with_pure(&target)?;
        Ok(PauliRow {
            location,
            pauli,
            branch,
            expected: pauli.syndrome(),
            fidelity,
            observables,
        })
    })
    .into_iter()
    .collect()
}

/// `n` points uniformly spaced on `[0, theta_max]`.
pub fn uniform_grid(n: usize, theta_max: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(SimError::EmptyGrid);
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    Ok((0..n).map(|i| theta_max * i as f64 / (n - 1) as f64).collect())
}

/// Thirteen points on `[0, π]`.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(13, PI).expect("nonempty")
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(SimError::EmptyGrid);
    }
    if grid.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(SimError::DegenerateFit("θ grid must be strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub location: usize,
    pub error_type: ErrorType,
    pub input: InputStateId,
    pub theta: f64,
    pub observables: Observables,
    /// Angle estimated from this point alone.
    pub theta_estimate: f64,
}

/// Averaged curves and fits at one error location.
#[derive(Debug, Clone, Serialize)]
pub struct LocationSummary {
    pub location: usize,
    pub i0_mean: Vec<f64>,
    pub i1_mean: Vec<f64>,
    pub i_mean: Vec<f64>,
    /// Angle estimated from the averaged `Ī0`, `Ī1`.
    pub theta_estimate: Vec<f64>,
    pub alpha0: Estimate,
    pub alpha1: Estimate,
    pub ibar: Estimate,
    pub line: LineFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub setting: Setting,
    pub grid: Vec<f64>,
    pub points: Vec<PointRecord>,
    pub locations: Vec<LocationSummary>,
}

fn cos2(t: f64) -> f64 {
    (t / 2.0).cos().powi(2)
}

fn sin2(t: f64) -> f64 {
    (t / 2.0).sin().powi(2)
}

fn summarise(location: usize, grid: &[f64], group: &[&PointRecord]) -> Result<LocationSummary> {
    let mut i0_mean = Vec::with_capacity(grid.len());
    let mut i1_mean = Vec::with_capacity(grid.len());
    let mut i_mean = Vec::with_capacity(grid.len());
    for &theta in grid {
        let at: Vec<&Observables> = group
            .iter()
            .filter(|p| p.theta == theta)
            .map(|p| &p.observables)
            .collect();
        let n = at.len() as f64;
        i0_mean.push(at.iter().map(|o| o.i0).sum::<f64>() / n);
        i1_mean.push(at.iter().map(|o| o.i1).sum::<f64>() / n);
        i_mean.push(at.iter().map(|o| o.i).sum::<f64>() / n);
    }
    let pair = |v: &[f64]| -> Vec<(f64, f64)> { grid.iter().copied().zip(v.iter().copied()).collect() };
    let theta_estimate = i0_mean
        .iter()
        .zip(&i1_mean)
        .map(|(&i0, &i1)| {
            estimate_theta(&Observables {
                a0: i0,
                a1: i1,
                i0,
                i1,
                i: i0 + i1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let line = if grid.len() >= 2 {
        fit_line(&pair(&theta_estimate))?
    } else {
        LineFit {
            a: f64::NAN,
            b: f64::NAN,
            a_stderr: f64::NAN,
            b_stderr: f64::NAN,
        }
    };
    let scale_or_nan = |v: &[f64], f: fn(f64) -> f64| {
        fit_scale(&pair(v), f).unwrap_or(Estimate {
            value: f64::NAN,
            stderr: f64::NAN,
        })
    };
    Ok(LocationSummary {
        location,
        alpha0: scale_or_nan(&i0_mean, cos2),
        alpha1: scale_or_nan(&i1_mean, sin2),
        ibar: fit_constant(&i_mean)?,
        i0_mean,
        i1_mean,
        i_mean,
        theta_estimate,
        line,
    })
}

fn run_sweep(
    code: &CodeSpec,
    setting: Setting,
    grid: &[f64],
    cases: &[(ErrorType, InputStateId)],
    noise: Option<&NoiseModel>,
    exec: Execution,
) -> Result<SweepResult> {
    check_grid(grid)?;
    let mut jobs = Vec::new();
    for location in 1..=N_QUBITS {
        for &(kind, input) in cases {
            for &theta in grid {
                jobs.push((location, kind, input, theta));
            }
        }
    }
    let points = exec
        .map(&jobs, |&(location, error_type, input, theta)| {
            let error = ErrorSpec::rotation(location, error_type, theta);
            let observables = run_point(code, input, &error, noise)?;
            Ok(PointRecord {
                location,
                error_type,
                input,
                theta,
                observables,
                theta_estimate: estimate_theta(&observables)?,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let locations = (1..=N_QUBITS)
        .map(|q| {
            let group: Vec<&PointRecord> = points.iter().filter(|p| p.location == q).collect();
            summarise(q, grid, &group)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        setting,
        grid: grid.to_vec(),
        points,
        locations,
    })
}

/// Input `|ψ_2⟩`; X-, Y- and Z-type rotations averaged per location.
pub fn run_setting_b(code: &CodeSpec, grid: &[f64], noise: Option<&NoiseModel>, exec: Execution) -> Result<SweepResult> {
    let cases: Vec<_> = ErrorType::ALL.iter().map(|&t| (t, InputStateId::K2)).collect();
    run_sweep(code, Setting::B, grid, &cases, noise, exec)
}

/// Y-type rotations on all three inputs, averaged per location.
pub fn run_setting_c(code: &CodeSpec, grid: &[f64], noise: Option<&NoiseModel>, exec: Execution) -> Result<SweepResult> {
    let cases: Vec<_> = InputStateId::ALL.iter().map(|&k| (ErrorType::Y, k)).collect();
    run_sweep(code, Setting::C, grid, &cases, noise, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code552::build_code;
    use approx::assert_abs_diff_eq;

    #[test]
    fn point_examples() {
        let code = build_code().unwrap();
        let o = run_point(&code, InputStateId::K2, &ErrorSpec::rotation(2, ErrorType::Y, 0.0), None).unwrap();
        assert_abs_diff_eq!(o.a0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o.a1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o.i, 1.0, epsilon = 1e-12);

        let o = run_point(&code, InputStateId::K2, &ErrorSpec::rotation(3, ErrorType::X, PI), None).unwrap();
        assert_abs_diff_eq!(o.a0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o.a1, 1.0, epsilon = 1e-12);

        let o = run_point(&code, InputStateId::K1, &ErrorSpec::rotation(1, ErrorType::Z, PI / 2.0), None).unwrap();
        assert_abs_diff_eq!(o.a0, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(o.a1, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(o.i, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn arbitrary_axis_uses_all_branches() {
        let code = build_code().unwrap();
        let n = 1.0 / 3f64.sqrt();
        let e = ErrorSpec::new(4, 0.3, 1.2, [n, -n, n]).unwrap();
        let o = run_point(&code, InputStateId::K3, &e, None).unwrap();
        assert_abs_diff_eq!(o.a0, cos2(1.2), epsilon = 1e-12);
        assert_abs_diff_eq!(o.a1, sin2(1.2), epsilon = 1e-12);
    }

    #[test]
    fn theta_estimates() {
        let o = |i0, i1| Observables { a0: i0, a1: i1, i0, i1, i: i0 + i1 };
        assert_eq!(estimate_theta(&o(1.0, 0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(estimate_theta(&o(0.5, 0.5)).unwrap(), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(estimate_theta(&o(0.0, 1.0)).unwrap(), PI, epsilon = 1e-15);
        assert_eq!(estimate_theta(&o(0.0, 0.0)).unwrap_err(), SimError::ZeroSignal);
    }

    #[test]
    fn setting_a_rows() {
        let code = build_code().unwrap();
        let rows = run_setting_a(&code, None, Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 20);
        for r in &rows {
            assert!(r.pass());
            assert_abs_diff_eq!(r.fidelity, 1.0, epsilon = 1e-10);
        }
        let y2 = rows.iter().find(|r| r.location == 2 && r.pauli == Pauli::Y).unwrap();
        assert_eq!(y2.branch.to_string(), "11");
        let z5 = rows.iter().find(|r| r.location == 5 && r.pauli == Pauli::Z).unwrap();
        assert_eq!(z5.branch.to_string(), "10");
    }

    #[test]
    fn grids() {
        assert_eq!(uniform_grid(0, 1.0).unwrap_err(), SimError::EmptyGrid);
        let g = default_grid();
        assert_eq!(g.len(), 13);
        assert_eq!(g[12], PI);
        let code = build_code().unwrap();
        assert!(run_setting_b(&code, &[0.0, 0.0], None, Execution::Sequential).is_err());
        assert!(run_setting_c(&code, &[], None, Execution::Sequential).is_err());
    }

    #[test]
    fn noiseless_setting_c_curves_are_input_independent() {
        let code = build_code().unwrap();
        let res = run_setting_c(&code, &default_grid(), None, Execution::Sequential).unwrap();
        for p in &res.points {
            let same: Vec<_> = res
                .points
                .iter()
                .filter(|o| o.location == p.location && o.theta == p.theta)
                .collect();
            for o in same {
                assert!((o.observables.a0 - p.observables.a0).abs() < 1e-10);
                assert!((o.observables.a1 - p.observables.a1).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let code = build_code().unwrap();
        let g = default_grid();
        let noise = NoiseModel::default_profile();
        let a = run_setting_b(&code, &g, Some(&noise), Execution::Parallel).unwrap();
        let b = run_setting_b(&code, &g, Some(&noise), Execution::Sequential).unwrap();
        assert_eq!(a.points.len(), b.points.len());
        for (x, y) in a.points.iter().zip(&b.points) {
            assert_eq!(x.observables, y.observables);
        }
    }
}
