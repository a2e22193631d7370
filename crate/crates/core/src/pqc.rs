//! Parameterized quantum circuits.
//!
//! A [`CircuitDesign`] compiles to a [`Circuit`]: per layer, one rotation
//! block (every qubit gets the layout's rotation gates, each with its own
//! trainable angle) followed by a CNOT chain `0→1, 1→2, …, n-2→n-1`. The
//! chain can optionally be closed into a ring with `n-1→0`.
//!
//! The readout is the vector of per-qubit `⟨Z⟩`. Gradients with respect to
//! circuit angles use the two-term shift rule
//! `∂f/∂θ = ½[f(θ + π/2) − f(θ − π/2)]`. Angle-encoded inputs are themselves
//! `exp(-i·x/2·P)` rotations, so their gradients use the same rule.
//! Amplitude-encoded inputs fall back to central finite differences.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use rand::Rng;

use crate::encode::EncodingScheme;
use crate::error::{Error, Result};
use crate::kv::KvMap;
use crate::qsim::{check_qubit_count, Axis, StateVector};

/// Step used for finite-difference input gradients under amplitude encoding.
pub const AMPLITUDE_FD_STEP: f64 = 1e-5;

/// Rotation gates applied to every qubit in each layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    Rx,
    RxRy,
    RyRx,
    Rz,
}

impl Layout {
    pub const ALL: [Layout; 4] = [Layout::Rx, Layout::RxRy, Layout::RyRx, Layout::Rz];

    pub fn rotations(self) -> &'static [Axis] {
        match self {
            Layout::Rx => &[Axis::X],
            Layout::RxRy => &[Axis::X, Axis::Y],
            Layout::RyRx => &[Axis::Y, Axis::X],
            Layout::Rz => &[Axis::Z],
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layout::Rx => "rx",
            Layout::RxRy => "rxry",
            Layout::RyRx => "ryrx",
            Layout::Rz => "rz",
        })
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rx" => Ok(Layout::Rx),
            "rxry" => Ok(Layout::RxRy),
            "ryrx" => Ok(Layout::RyRx),
            "rz" => Ok(Layout::Rz),
            other => Err(Error::Config(format!("unknown circuit layout '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CircuitDesign {
    pub layout: Layout,
    pub n_qubits: usize,
    pub n_layers: usize,
    pub encoding: EncodingScheme,
    /// Close each CNOT chain with `n-1 → 0`.
    pub ring: bool,
}

impl CircuitDesign {
    pub fn new(
        layout: Layout,
        n_qubits: usize,
        n_layers: usize,
        encoding: EncodingScheme,
    ) -> Result<Self> {
        let d = CircuitDesign {
            layout,
            n_qubits,
            n_layers,
            encoding,
            ring: false,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        check_qubit_count(self.n_qubits)?;
        if self.n_layers == 0 {
            return Err(Error::Config("circuit needs at least one layer".into()));
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.n_layers * self.n_qubits * self.layout.rotations().len()
    }

    pub fn to_config_string(&self) -> String {
        format!(
            "layout = {}\nn_qubits = {}\nn_layers = {}\nencoding = {}\nring = {}\n",
            self.layout, self.n_qubits, self.n_layers, self.encoding, self.ring
        )
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let kv = KvMap::parse(text)?;
        kv.reject_unknown(&["layout", "n_qubits", "n_layers", "encoding", "ring"])?;
        let d = CircuitDesign {
            layout: kv.require("layout")?,
            n_qubits: kv.require("n_qubits")?,
            n_layers: kv.get("n_layers")?.unwrap_or(1),
            encoding: kv.require("encoding")?,
            ring: kv.get("ring")?.unwrap_or(false),
        };
        d.validate()?;
        Ok(d)
    }
}

/// Trainable rotation angles for one circuit, in compiled parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitParams(Vec<f64>);

impl CircuitParams {
    pub fn new(design: &CircuitDesign, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != design.parameter_count() {
            return Err(Error::Dimension(format!(
                "design has {} parameters, got {}",
                design.parameter_count(),
                theta.len()
            )));
        }
        Ok(CircuitParams(theta))
    }

    pub fn zeros(design: &CircuitDesign) -> Self {
        CircuitParams(vec![0.0; design.parameter_count()])
    }

    /// Angles drawn uniformly from `[-π, π)`.
    pub fn random<R: Rng + ?Sized>(design: &CircuitDesign, rng: &mut R) -> Self {
        let pi = std::f64::consts::PI;
        CircuitParams(
            (0..design.parameter_count())
                .map(|_| rng.gen_range(-pi..pi))
                .collect(),
        )
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for CircuitParams {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Rotation {
        axis: Axis,
        qubit: usize,
        param: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

/// A compiled gate program.
#[derive(Debug, Clone)]
pub struct Circuit {
    design: CircuitDesign,
    ops: Vec<Op>,
}

/// Compiles `design`. Parameters are indexed layer-major, then by qubit,
/// then by rotation order within the qubit.
pub fn build_circuit(design: &CircuitDesign) -> Circuit {
    let n = design.n_qubits;
    let mut ops = Vec::new();
    let mut param = 0;
    for _ in 0..design.n_layers {
        for qubit in 0..n {
            for &axis in design.layout.rotations() {
                ops.push(Op::Rotation { axis, qubit, param });
                param += 1;
            }
        }
        for q in 0..n.saturating_sub(1) {
            ops.push(Op::Cnot {
                control: q,
                target: q + 1,
            });
        }
        if design.ring && n > 2 {
            ops.push(Op::Cnot {
                control: n - 1,
                target: 0,
            });
        }
    }
    Circuit {
        design: *design,
        ops,
    }
}

impl Circuit {
    pub fn new(design: &CircuitDesign) -> Result<Self> {
        design.validate()?;
        Ok(build_circuit(design))
    }

    pub fn design(&self) -> &CircuitDesign {
        &self.design
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn n_qubits(&self) -> usize {
        self.design.n_qubits
    }

    pub fn parameter_count(&self) -> usize {
        self.design.parameter_count()
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::Dimension(format!(
                "circuit expects {} parameters, got {}",
                self.parameter_count(),
                params.len()
            )));
        }
        Ok(())
    }

    /// Applies the compiled gates to an already prepared state.
    pub fn run(&self, params: &[f64], mut state: StateVector) -> Result<StateVector> {
        self.check_params(params)?;
        if state.n_qubits() != self.n_qubits() {
            return Err(Error::Dimension(format!(
                "circuit acts on {} qubits, state has {}",
                self.n_qubits(),
                state.n_qubits()
            )));
        }
        self.apply_ops(params, &mut state);
        Ok(state)
    }

    fn apply_ops(&self, params: &[f64], state: &mut StateVector) {
        for op in &self.ops {
            match *op {
                Op::Rotation { axis, qubit, param } => {
                    state.apply_matrix_unchecked(qubit, &axis.rotation_matrix(params[param]))
                }
                Op::Cnot { control, target } => state.cnot_unchecked(control, target),
            }
        }
    }

    /// Encodes `features`, runs the circuit, and returns `[⟨Z_0⟩, …, ⟨Z_{n-1}⟩]`.
    pub fn forward(&self, params: &[f64], features: &[f64]) -> Result<Vec<f64>> {
        self.check_params(params)?;
        let mut state = self.design.encoding.encode(features, self.n_qubits())?;
        self.apply_ops(params, &mut state);
        Ok(state.expectations_z())
    }

    /// `Jᵀ·upstream` over circuit angles, with `J` from the shift rule:
    /// two forwards per parameter.
    pub fn gradient_params(
        &self,
        params: &[f64],
        features: &[f64],
        upstream: &[f64],
    ) -> Result<Vec<f64>> {
        self.check_params(params)?;
        self.check_upstream(upstream)?;
        let mut shifted = params.to_vec();
        let mut grad = Vec::with_capacity(params.len());
        for j in 0..params.len() {
            shifted[j] = params[j] + FRAC_PI_2;
            let plus = self.forward(&shifted, features)?;
            shifted[j] = params[j] - FRAC_PI_2;
            let minus = self.forward(&shifted, features)?;
            shifted[j] = params[j];
            grad.push(
                upstream
                    .iter()
                    .zip(plus.iter().zip(&minus))
                    .map(|(u, (p, m))| u * 0.5 * (p - m))
                    .sum(),
            );
        }
        Ok(grad)
    }

    /// `Jᵀ·upstream` over input features. Angle encodings use the shift rule
    /// on the encoding rotations. Amplitude encoding needs
    /// `allow_finite_difference`, and then uses central differences with step
    /// [`AMPLITUDE_FD_STEP`].
    pub fn gradient_inputs(
        &self,
        params: &[f64],
        features: &[f64],
        upstream: &[f64],
        allow_finite_difference: bool,
    ) -> Result<Vec<f64>> {
        self.check_params(params)?;
        self.check_upstream(upstream)?;
        let (shift, scale) = match self.design.encoding {
            EncodingScheme::Amplitude if !allow_finite_difference => {
                return Err(Error::UnsupportedGradient(
                    "amplitude encoding has no shift rule; enable the finite-difference fallback"
                        .into(),
                ))
            }
            EncodingScheme::Amplitude => (AMPLITUDE_FD_STEP, 1.0 / (2.0 * AMPLITUDE_FD_STEP)),
            _ => (FRAC_PI_2, 0.5),
        };
        let mut shifted = features.to_vec();
        let mut grad = Vec::with_capacity(features.len());
        for k in 0..features.len() {
            shifted[k] = features[k] + shift;
            let plus = self.forward(params, &shifted)?;
            shifted[k] = features[k] - shift;
            let minus = self.forward(params, &shifted)?;
            shifted[k] = features[k];
            grad.push(
                upstream
                    .iter()
                    .zip(plus.iter().zip(&minus))
                    .map(|(u, (p, m))| u * scale * (p - m))
                    .sum(),
            );
        }
        Ok(grad)
    }

    fn check_upstream(&self, upstream: &[f64]) -> Result<()> {
        if upstream.len() != self.n_qubits() {
            return Err(Error::Dimension(format!(
                "upstream gradient has {} entries for {} qubits",
                upstream.len(),
                self.n_qubits()
            )));
        }
        Ok(())
    }
}

pub fn forward(
    design: &CircuitDesign,
    params: &CircuitParams,
    features: &[f64],
) -> Result<Vec<f64>> {
    Circuit::new(design)?.forward(params, features)
}

pub fn gradient_params(
    design: &CircuitDesign,
    params: &CircuitParams,
    features: &[f64],
    upstream: &[f64],
) -> Result<Vec<f64>> {
    Circuit::new(design)?.gradient_params(params, features, upstream)
}

pub fn gradient_inputs(
    design: &CircuitDesign,
    params: &CircuitParams,
    features: &[f64],
    upstream: &[f64],
    allow_finite_difference: bool,
) -> Result<Vec<f64>> {
    Circuit::new(design)?.gradient_inputs(params, features, upstream, allow_finite_difference)
}
