//! Ideal statevector simulator.
//!
//! Qubit 0 is the most significant bit of a basis index: on three qubits the
//! amplitude at index `0b100` belongs to `|1⟩|0⟩|0⟩`. Rotations follow the
//! `exp(-i·θ/2·σ)` convention for all three axes.
//!
//! Everything here is exact. There is no shot sampling; expectations are read
//! straight off the amplitudes.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the simulator will allocate (2^20 amplitudes, 16 MiB).
pub const MAX_QUBITS: usize = 20;

/// A 2×2 complex matrix in row-major order.
pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Rotation axis of an `R_x`, `R_y` or `R_z` gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn rotation_matrix(self, theta: f64) -> Matrix2 {
        let (s, c) = (theta / 2.0).sin_cos();
        match self {
            Axis::X => [
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ],
            Axis::Y => [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ],
            Axis::Z => [[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// A gate acting on one or two qubits of a register.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn rotation(axis: Axis, target: usize, theta: f64) -> Gate {
        match axis {
            Axis::X => Gate::Rx(target, theta),
            Axis::Y => Gate::Ry(target, theta),
            Axis::Z => Gate::Rz(target, theta),
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => q,
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => q,
            Gate::Cnot { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Cnot { control, .. } => Some(control),
            _ => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, t) | Gate::Ry(_, t) | Gate::Rz(_, t) => Some(t),
            _ => None,
        }
    }

    /// The 2×2 unitary of a single-qubit gate; `None` for CNOT.
    pub fn matrix(&self) -> Option<Matrix2> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = match *self {
            Gate::H(_) => [
                [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
                [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
            ],
            Gate::X(_) => [[ZERO, ONE], [ONE, ZERO]],
            Gate::Y(_) => [[ZERO, -I], [I, ZERO]],
            Gate::Z(_) => [[ONE, ZERO], [ZERO, -ONE]],
            Gate::Rx(_, t) => Axis::X.rotation_matrix(t),
            Gate::Ry(_, t) => Axis::Y.rotation_matrix(t),
            Gate::Rz(_, t) => Axis::Z.rotation_matrix(t),
            Gate::Cnot { .. } => return None,
        };
        Some(m)
    }
}

/// The amplitudes of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

pub(crate) fn check_qubit_count(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Config(format!(
            "qubit count {n_qubits} outside supported range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes, checking the length is a power of two and the
    /// norm is one within `1e-10`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Precondition(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_qubit_count(n_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Precondition(format!("state norm {norm} is not 1")));
        }
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    pub(crate) fn from_raw(n_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_index(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::Precondition(format!(
                "qubit {qubit} out of range for a {}-qubit register",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Returns a new state with `gate` applied.
    pub fn apply(&self, gate: &Gate) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_mut(gate)?;
        Ok(out)
    }

    pub fn apply_mut(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::Cnot { control, target } => {
                self.check_index(control)?;
                self.check_index(target)?;
                if control == target {
                    return Err(Error::Precondition(format!(
                        "CNOT control and target are both qubit {control}"
                    )));
                }
                self.cnot_unchecked(control, target);
            }
            _ => {
                let q = gate.target();
                self.check_index(q)?;
                let m = gate.matrix().expect("single-qubit gate");
                self.apply_matrix_unchecked(q, &m);
            }
        }
        Ok(())
    }

    pub(crate) fn apply_matrix_unchecked(&mut self, qubit: usize, m: &Matrix2) {
        let stride = self.mask(qubit);
        let dim = self.amplitudes.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + stride {
                let a = self.amplitudes[i];
                let b = self.amplitudes[i + stride];
                self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
                self.amplitudes[i + stride] = m[1][0] * a + m[1][1] * b;
            }
            base += stride << 1;
        }
    }

    pub(crate) fn cnot_unchecked(&mut self, control: usize, target: usize) {
        let cm = self.mask(control);
        let tm = self.mask(target);
        for i in 0..self.amplitudes.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
    }

    /// `⟨Z⟩` on one qubit.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_index(qubit)?;
        let m = self.mask(qubit);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if i & m == 0 {
                    a.norm_sqr()
                } else {
                    -a.norm_sqr()
                }
            })
            .sum())
    }

    /// `⟨Z_q⟩` for every qubit in one pass.
    pub fn expectations_z(&self) -> Vec<f64> {
        let n = self.n_qubits;
        let mut out = vec![0.0; n];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, e) in out.iter_mut().enumerate() {
                if i & (1 << (n - 1 - q)) == 0 {
                    *e += p;
                } else {
                    *e -= p;
                }
            }
        }
        out
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

pub fn zero_state(n_qubits: usize) -> Result<StateVector> {
    StateVector::zero(n_qubits)
}

/// Applies a single-qubit gate. CNOT is rejected; use [`apply_cnot`].
pub fn apply_single_qubit(gate: &Gate, state: &StateVector) -> Result<StateVector> {
    if let Gate::Cnot { .. } = gate {
        return Err(Error::Precondition(
            "apply_single_qubit called with a CNOT".into(),
        ));
    }
    state.apply(gate)
}

pub fn apply_cnot(control: usize, target: usize, state: &StateVector) -> Result<StateVector> {
    state.apply(&Gate::Cnot { control, target })
}

pub fn expectation_z(state: &StateVector, qubit: usize) -> Result<f64> {
    state.expectation_z(qubit)
}

pub fn probabilities(state: &StateVector) -> Vec<f64> {
    state.probabilities()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn basis(n: usize, index: usize) -> StateVector {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn zero_state_examples() {
        assert_eq!(zero_state(1).unwrap().amplitudes(), &[ONE, ZERO]);
        assert_eq!(
            zero_state(2).unwrap().amplitudes(),
            &[ONE, ZERO, ZERO, ZERO]
        );
        assert!(matches!(zero_state(21), Err(Error::Config(_))));
        assert!(matches!(zero_state(0), Err(Error::Config(_))));
    }

    #[test]
    fn hadamard_and_rx_pi() {
        let s = apply_single_qubit(&Gate::H(0), &zero_state(1).unwrap()).unwrap();
        assert!(close(s.amplitudes()[0], Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitudes()[1], Complex64::new(FRAC_1_SQRT_2, 0.0)));

        let s = apply_single_qubit(&Gate::Rx(0, PI), &zero_state(1).unwrap()).unwrap();
        assert!(close(s.amplitudes()[0], ZERO));
        assert!(close(s.amplitudes()[1], -I));
    }

    #[test]
    fn ry_pi_third() {
        let zero = zero_state(1).unwrap();
        let s = apply_single_qubit(&Gate::Ry(0, PI / 3.0), &zero).unwrap();
        assert!((s.amplitudes()[0].re - 0.8660254037844387).abs() < 1e-12);
        assert!((s.amplitudes()[1].re - 0.5).abs() < 1e-12);
        // input untouched
        assert_eq!(zero.amplitudes()[0], ONE);
    }

    #[test]
    fn single_qubit_rejects_cnot_and_bad_index() {
        let s = zero_state(2).unwrap();
        assert!(apply_single_qubit(
            &Gate::Cnot {
                control: 0,
                target: 1
            },
            &s
        )
        .is_err());
        assert!(matches!(s.apply(&Gate::X(2)), Err(Error::Precondition(_))));
    }

    #[test]
    fn cnot_truth_table() {
        // |10⟩ is index 2 because qubit 0 is the high bit
        let out = apply_cnot(0, 1, &basis(2, 0b10)).unwrap();
        assert_eq!(out, basis(2, 0b11));
        let out = apply_cnot(0, 1, &basis(2, 0b01)).unwrap();
        assert_eq!(out, basis(2, 0b01));
        assert!(matches!(
            apply_cnot(1, 1, &basis(2, 0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn bell_state() {
        let h = FRAC_1_SQRT_2;
        let plus = StateVector::from_amplitudes(vec![
            Complex64::new(h, 0.0),
            ZERO,
            Complex64::new(h, 0.0),
            ZERO,
        ])
        .unwrap();
        let bell = apply_cnot(0, 1, &plus).unwrap();
        let expect = [h, 0.0, 0.0, h];
        for (a, e) in bell.amplitudes().iter().zip(expect) {
            assert!(close(*a, Complex64::new(e, 0.0)));
        }
    }

    #[test]
    fn expectation_examples() {
        let zero = zero_state(1).unwrap();
        assert_eq!(expectation_z(&zero, 0).unwrap(), 1.0);
        let plus = zero.apply(&Gate::H(0)).unwrap();
        assert!(expectation_z(&plus, 0).unwrap().abs() < 1e-15);
        let r = zero.apply(&Gate::Ry(0, PI / 3.0)).unwrap();
        let e = expectation_z(&r, 0).unwrap();
        assert!((e - 0.5).abs() < 1e-12);
        // cross-check against the outcome distribution
        let p = probabilities(&r);
        assert!((p[0] - p[1] - e).abs() < 1e-12);
        assert!(expectation_z(&r, 1).is_err());
    }

    #[test]
    fn expectations_all_matches_single() {
        let mut s = zero_state(3).unwrap();
        for (q, t) in [(0, 0.3), (1, 1.1), (2, -2.0)] {
            s.apply_mut(&Gate::Ry(q, t)).unwrap();
        }
        s.apply_mut(&Gate::Cnot {
            control: 0,
            target: 2,
        })
        .unwrap();
        let all = s.expectations_z();
        for q in 0..3 {
            assert!((all[q] - s.expectation_z(q).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn probabilities_examples() {
        assert_eq!(probabilities(&zero_state(1).unwrap()), vec![1.0, 0.0]);
        let p = probabilities(&zero_state(1).unwrap().apply(&Gate::H(0)).unwrap());
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let s =
            StateVector::from_amplitudes(vec![Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)])
                .unwrap();
        let p = probabilities(&s);
        assert!((p[0] - 0.36).abs() < 1e-12 && (p[1] - 0.64).abs() < 1e-12);
    }

    #[test]
    fn from_amplitudes_validation() {
        assert!(StateVector::from_amplitudes(vec![ONE, ONE]).is_err());
        assert!(StateVector::from_amplitudes(vec![ONE, ZERO, ZERO]).is_err());
    }
}
