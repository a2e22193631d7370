//! Classical-to-quantum feature maps.
//!
//! Angle encodings put one feature on each qubit: every qubit starts in
//! `|+⟩ = H|0⟩` and is rotated by `R_axis(feature)`. Amplitude encoding
//! writes the normalized feature vector directly into the amplitudes, with
//! no Hadamard layer in front.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qsim::{check_qubit_count, Axis, StateVector, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodingScheme {
    AngleRx,
    AngleRy,
    AngleRz,
    Amplitude,
}

impl EncodingScheme {
    pub const ALL: [EncodingScheme; 4] = [
        EncodingScheme::AngleRx,
        EncodingScheme::AngleRy,
        EncodingScheme::AngleRz,
        EncodingScheme::Amplitude,
    ];

    pub fn axis(self) -> Option<Axis> {
        match self {
            EncodingScheme::AngleRx => Some(Axis::X),
            EncodingScheme::AngleRy => Some(Axis::Y),
            EncodingScheme::AngleRz => Some(Axis::Z),
            EncodingScheme::Amplitude => None,
        }
    }

    /// Largest feature vector a register of `n_qubits` can hold.
    pub fn capacity(self, n_qubits: usize) -> usize {
        match self {
            EncodingScheme::Amplitude => 1 << n_qubits,
            _ => n_qubits,
        }
    }

    /// Encodes `features` onto exactly `n_qubits` qubits. Angle schemes need
    /// one feature per qubit; amplitude encoding zero-pads up to `2^n_qubits`.
    pub fn encode(self, features: &[f64], n_qubits: usize) -> Result<StateVector> {
        check_qubit_count(n_qubits)?;
        match self.axis() {
            Some(axis) => {
                if features.len() != n_qubits {
                    return Err(Error::Precondition(format!(
                        "angle encoding needs {n_qubits} features, got {}",
                        features.len()
                    )));
                }
                angle_encode(features, axis)
            }
            None => {
                if features.len() > 1 << n_qubits {
                    return Err(Error::Precondition(format!(
                        "{} features do not fit in the amplitudes of {n_qubits} qubits",
                        features.len()
                    )));
                }
                let amps = normalized_padded(features, 1 << n_qubits)?;
                Ok(StateVector::from_raw(n_qubits, amps))
            }
        }
    }
}

impl fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingScheme::AngleRx => "rx",
            EncodingScheme::AngleRy => "ry",
            EncodingScheme::AngleRz => "rz",
            EncodingScheme::Amplitude => "amplitude",
        })
    }
}

impl FromStr for EncodingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rx" | "angle_rx" | "anglerx" => Ok(EncodingScheme::AngleRx),
            "ry" | "angle_ry" | "anglery" => Ok(EncodingScheme::AngleRy),
            "rz" | "angle_rz" | "anglerz" => Ok(EncodingScheme::AngleRz),
            "amplitude" | "amp" => Ok(EncodingScheme::Amplitude),
            other => Err(Error::Config(format!("unknown encoding '{other}'"))),
        }
    }
}

/// `H^{⊗n}|0…0⟩`.
pub fn prepare_uniform_superposition(n_qubits: usize) -> Result<StateVector> {
    check_qubit_count(n_qubits)?;
    let a = (1.0 / (1u64 << n_qubits) as f64).sqrt();
    Ok(StateVector::from_raw(
        n_qubits,
        vec![Complex64::new(a, 0.0); 1 << n_qubits],
    ))
}

/// Rotates qubit `i` of the uniform superposition by `R_axis(features[i])`.
///
/// The result is a product state, so it is assembled as a Kronecker product
/// of the per-qubit columns `R(x)|+⟩` rather than by gate application.
pub fn angle_encode(features: &[f64], axis: Axis) -> Result<StateVector> {
    let n = features.len();
    check_qubit_count(n)?;
    if let Some(bad) = features.iter().find(|x| !x.is_finite()) {
        return Err(Error::Input(format!("non-finite feature {bad}")));
    }
    // the H factors are applied once at the end so zero angles give the
    // uniform superposition bit for bit
    let mut amps = Vec::with_capacity(1 << n);
    amps.push(Complex64::new(1.0, 0.0));
    for &x in features {
        let m = axis.rotation_matrix(x);
        let q0 = m[0][0] + m[0][1];
        let q1 = m[1][0] + m[1][1];
        let prev = std::mem::take(&mut amps);
        amps.reserve(prev.len() * 2);
        for a in prev {
            amps.push(a * q0);
            amps.push(a * q1);
        }
    }
    let scale = (1.0 / (1u64 << n) as f64).sqrt();
    for a in &mut amps {
        *a *= scale;
    }
    Ok(StateVector::from_raw(n, amps))
}

/// `x / ‖x‖`, zero-padded to the next power of two (at least two amplitudes).
pub fn amplitude_encode(features: &[f64]) -> Result<StateVector> {
    let padded = features.len().max(2).next_power_of_two();
    let n = padded.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::Config(format!(
            "{} features exceed the {MAX_QUBITS}-qubit simulator cap",
            features.len()
        )));
    }
    let amps = normalized_padded(features, padded)?;
    Ok(StateVector::from_raw(n, amps))
}

fn normalized_padded(features: &[f64], len: usize) -> Result<Vec<Complex64>> {
    if let Some(bad) = features.iter().find(|x| !x.is_finite()) {
        return Err(Error::Input(format!("non-finite feature {bad}")));
    }
    let norm = features.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let mut amps: Vec<Complex64> = features
        .iter()
        .map(|&x| Complex64::new(x / norm, 0.0))
        .collect();
    amps.resize(len, Complex64::new(0.0, 0.0));
    Ok(amps)
}
