//! Single-qubit unitary errors `e^{iα} R_n(θ)` and their expansion in the
//! `{E, X, Z, Y}` basis.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::statevec::{gates, PureState};
use crate::{Result, SimError, C64};

/// Single-qubit Pauli operator. `E` is the identity.
///
/// The discriminant is the two-bit syndrome label `jl` read on qubits (1, 5)
/// after decoding: `E → 00`, `X → 01`, `Z → 10`, `Y → 11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    E = 0b00,
    X = 0b01,
    Z = 0b10,
    Y = 0b11,
}

impl Pauli {
    /// In coefficient order `c00, c01, c10, c11`.
    pub const ALL: [Pauli; 4] = [Pauli::E, Pauli::X, Pauli::Z, Pauli::Y];

    pub fn matrix(self) -> Matrix2<C64> {
        match self {
            Pauli::E => gates::identity(),
            Pauli::X => gates::pauli_x(),
            Pauli::Z => gates::pauli_z(),
            Pauli::Y => gates::pauli_y(),
        }
    }

    pub fn syndrome(self) -> Syndrome {
        Syndrome(self as u8)
    }

    pub fn from_syndrome(s: Syndrome) -> Pauli {
        Pauli::ALL[s.0 as usize]
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::E => 'E',
            Pauli::X => 'X',
            Pauli::Z => 'Z',
            Pauli::Y => 'Y',
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Pauli {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "E" | "I" => Ok(Pauli::E),
            "X" => Ok(Pauli::X),
            "Y" => Ok(Pauli::Y),
            "Z" => Ok(Pauli::Z),
            _ => Err(SimError::InvalidLabel(s.to_string())),
        }
    }
}

/// Two-bit syndrome `|jl⟩` on qubits 1 (`j`) and 5 (`l`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syndrome(pub u8);

impl Syndrome {
    pub fn j(self) -> u8 {
        (self.0 >> 1) & 1
    }

    pub fn l(self) -> u8 {
        self.0 & 1
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.j(), self.l())
    }
}

/// Rotation-axis family used by the typed sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorType {
    X,
    Y,
    Z,
}

impl ErrorType {
    pub const ALL: [ErrorType; 3] = [ErrorType::X, ErrorType::Y, ErrorType::Z];

    pub fn axis(self) -> [f64; 3] {
        match self {
            ErrorType::X => [1.0, 0.0, 0.0],
            ErrorType::Y => [0.0, 1.0, 0.0],
            ErrorType::Z => [0.0, 0.0, 1.0],
        }
    }

    pub fn pauli(self) -> Pauli {
        match self {
            ErrorType::X => Pauli::X,
            ErrorType::Y => Pauli::Y,
            ErrorType::Z => Pauli::Z,
        }
    }

    /// The axis family of `axis`, if it is exactly a coordinate axis.
    pub fn of_axis(axis: [f64; 3]) -> Option<ErrorType> {
        ErrorType::ALL.into_iter().find(|t| t.axis() == axis)
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pauli())
    }
}

/// An error `e^{iα} R_n(θ)` at a known qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSpec {
    pub location: usize,
    pub alpha: f64,
    pub theta: f64,
    pub axis: [f64; 3],
}

impl ErrorSpec {
    pub fn new(location: usize, alpha: f64, theta: f64, axis: [f64; 3]) -> Result<Self> {
        let spec = Self {
            location,
            alpha,
            theta,
            axis,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// No error at `location`.
    pub fn identity(location: usize) -> Self {
        Self {
            location,
            alpha: 0.0,
            theta: 0.0,
            axis: [0.0, 0.0, 1.0],
        }
    }

    /// Rotation about a coordinate axis with `α = 0`.
    pub fn rotation(location: usize, kind: ErrorType, theta: f64) -> Self {
        Self {
            location,
            alpha: 0.0,
            theta,
            axis: kind.axis(),
        }
    }

    /// The exact Pauli operator: `P = e^{iπ/2} R_P(π)`.
    pub fn pauli(location: usize, pauli: Pauli) -> Self {
        let axis = match pauli {
            Pauli::E => return Self::identity(location),
            Pauli::X => [1.0, 0.0, 0.0],
            Pauli::Y => [0.0, 1.0, 0.0],
            Pauli::Z => [0.0, 0.0, 1.0],
        };
        Self {
            location,
            alpha: FRAC_PI_2,
            theta: PI,
            axis,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let norm = self.axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 || !norm.is_finite() {
            return Err(SimError::NonUnitAxis(norm));
        }
        Ok(())
    }

    pub fn error_type(&self) -> Option<ErrorType> {
        ErrorType::of_axis(self.axis)
    }
}

/// Coefficients of `ℰ = c00 E + c01 X + c10 Z + c11 Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliExpansion {
    pub c00: C64,
    pub c01: C64,
    pub c10: C64,
    pub c11: C64,
}

impl PauliExpansion {
    /// Coefficient attached to `p`.
    pub fn coefficient(&self, p: Pauli) -> C64 {
        match p {
            Pauli::E => self.c00,
            Pauli::X => self.c01,
            Pauli::Z => self.c10,
            Pauli::Y => self.c11,
        }
    }

    pub fn as_array(&self) -> [C64; 4] {
        [self.c00, self.c01, self.c10, self.c11]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.as_array().iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn reconstruct(&self) -> Matrix2<C64> {
        Pauli::ALL
            .iter()
            .map(|&p| p.matrix() * self.coefficient(p))
            .fold(Matrix2::zeros(), |acc, m| acc + m)
    }
}

/// `e^{iα} exp(−iθ n·σ/2)`.
pub fn error_unitary(spec: &ErrorSpec) -> Result<Matrix2<C64>> {
    spec.validate()?;
    Ok(gates::rotation(spec.axis, spec.theta) * C64::from_polar(1.0, spec.alpha))
}

pub fn pauli_expand(spec: &ErrorSpec) -> Result<PauliExpansion> {
    spec.validate()?;
    let phase = C64::from_polar(1.0, spec.alpha);
    let (s, c) = (spec.theta / 2.0).sin_cos();
    let k = -C64::i() * phase * s;
    let [nx, ny, nz] = spec.axis;
    Ok(PauliExpansion {
        c00: phase * c,
        c01: k * nx,
        c10: k * nz,
        c11: k * ny,
    })
}

/// Syndrome state `c00|00⟩ + c01|01⟩ + c10|10⟩ + c11|11⟩` on qubits (1, 5).
pub fn predicted_syndrome(spec: &ErrorSpec) -> Result<PureState> {
    PureState::from_amplitudes(pauli_expand(spec)?.as_array().to_vec())
}
