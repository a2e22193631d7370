use rand::Rng;

use crate::error::{dim_check, Result};
use crate::nn::{join_name, Linear, NamedTensor, Parameterized};
use crate::pqc::{Circuit, CircuitDesign, CircuitParams};

/// A compiled circuit together with its trainable angles.
#[derive(Debug, Clone)]
pub struct Vqc {
    circuit: Circuit,
    pub theta: Vec<f64>,
}

impl PartialEq for Vqc {
    fn eq(&self, other: &Self) -> bool {
        self.design() == other.design() && self.theta == other.theta
    }
}

impl Vqc {
    pub fn new(design: &CircuitDesign, theta: Vec<f64>) -> Result<Self> {
        let theta = CircuitParams::new(design, theta)?.into_inner();
        Ok(Vqc {
            circuit: Circuit::new(design)?,
            theta,
        })
    }

    pub fn zeros(design: &CircuitDesign) -> Result<Self> {
        Self::new(design, vec![0.0; design.parameter_count()])
    }

    /// Angles drawn uniformly from `[-π, π)`.
    pub fn random<R: Rng + ?Sized>(design: &CircuitDesign, rng: &mut R) -> Result<Self> {
        Self::new(design, CircuitParams::random(design, rng).into_inner())
    }

    pub fn design(&self) -> &CircuitDesign {
        self.circuit.design()
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.circuit.forward(&self.theta, features)
    }

    /// Adds `∂L/∂θ` into `grad_theta` and returns `∂L/∂features`.
    pub fn backward(
        &self,
        features: &[f64],
        upstream: &[f64],
        grad_theta: &mut [f64],
    ) -> Result<Vec<f64>> {
        if upstream.iter().all(|&u| u == 0.0) {
            return Ok(vec![0.0; features.len()]);
        }
        let g = self
            .circuit
            .gradient_params(&self.theta, features, upstream)?;
        for (a, b) in grad_theta.iter_mut().zip(g) {
            *a += b;
        }
        self.circuit
            .gradient_inputs(&self.theta, features, upstream, true)
    }
}

impl Parameterized for Vqc {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        out.push(NamedTensor {
            name: join_name(prefix, "theta"),
            shape: vec![self.theta.len()],
            values: &self.theta,
        });
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        out.push(&mut self.theta);
    }
}

/// The quantum replacement for an affine map: linear down-projection to one
/// feature per qubit, encoding, circuit, per-qubit `⟨Z⟩`, and an optional
/// linear up-projection.
#[derive(Debug, Clone, PartialEq)]
pub struct QLayer {
    pub in_proj: Linear,
    pub vqc: Vqc,
    pub out_proj: Option<Linear>,
}

#[derive(Debug, Clone)]
pub struct QLayerCache {
    pub x: Vec<f64>,
    pub features: Vec<f64>,
    pub expectations: Vec<f64>,
}

impl QLayer {
    /// `out = None` leaves the `n_qubits` expectations as the output.
    pub fn init<R: Rng + ?Sized>(
        input: usize,
        design: &CircuitDesign,
        out: Option<usize>,
        rng: &mut R,
    ) -> Result<Self> {
        let in_proj = Linear::init(input, design.n_qubits, rng);
        let vqc = Vqc::random(design, rng)?;
        let out_proj = out.map(|o| Linear::init(design.n_qubits, o, rng));
        Ok(QLayer {
            in_proj,
            vqc,
            out_proj,
        })
    }

    pub fn zeros(input: usize, design: &CircuitDesign, out: Option<usize>) -> Result<Self> {
        Ok(QLayer {
            in_proj: Linear::zeros(input, design.n_qubits),
            vqc: Vqc::zeros(design)?,
            out_proj: out.map(|o| Linear::zeros(design.n_qubits, o)),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.in_proj.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.out_proj
            .as_ref()
            .map_or(self.vqc.n_qubits(), Linear::output_dim)
    }

    pub fn n_qubits(&self) -> usize {
        self.vqc.n_qubits()
    }

    pub fn validate(&self) -> Result<()> {
        dim_check(self.in_proj.output_dim() == self.vqc.n_qubits(), || {
            format!(
                "in_proj has {} outputs for {} qubits",
                self.in_proj.output_dim(),
                self.vqc.n_qubits()
            )
        })?;
        if let Some(p) = &self.out_proj {
            dim_check(p.input_dim() == self.vqc.n_qubits(), || {
                format!(
                    "out_proj has {} inputs for {} qubits",
                    p.input_dim(),
                    self.vqc.n_qubits()
                )
            })?;
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, QLayerCache)> {
        let features = self.in_proj.try_forward(x)?;
        let expectations = self.vqc.forward(&features)?;
        let y = match &self.out_proj {
            Some(p) => p.forward(&expectations),
            None => expectations.clone(),
        };
        Ok((
            y,
            QLayerCache {
                x: x.to_vec(),
                features,
                expectations,
            },
        ))
    }

    /// Accumulates all parameter gradients into `grad`; returns `∂L/∂x`.
    pub fn backward(&self, cache: &QLayerCache, dy: &[f64], grad: &mut QLayer) -> Result<Vec<f64>> {
        let de = match (&self.out_proj, &mut grad.out_proj) {
            (Some(p), Some(g)) => p.backward(&cache.expectations, dy, g),
            _ => dy.to_vec(),
        };
        let dz = self
            .vqc
            .backward(&cache.features, &de, &mut grad.vqc.theta)?;
        Ok(self.in_proj.backward(&cache.x, &dz, &mut grad.in_proj))
    }
}

impl Parameterized for QLayer {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        self.in_proj.collect(&join_name(prefix, "in_proj"), out);
        self.vqc.collect(prefix, out);
        if let Some(p) = &self.out_proj {
            p.collect(&join_name(prefix, "out_proj"), out);
        }
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.in_proj.collect_mut(out);
        self.vqc.collect_mut(out);
        if let Some(p) = &mut self.out_proj {
            p.collect_mut(out);
        }
    }
}
