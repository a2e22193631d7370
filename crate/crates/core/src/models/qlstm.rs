use rand::Rng;

use super::qlayer::Vqc;
use crate::error::{dim_check, Result};
use crate::nn::{
    join_name, lstm_combine, lstm_combine_backward, GateCache, Linear, NamedTensor, Parameterized,
};
use crate::pqc::CircuitDesign;

/// LSTM cell whose four gate transforms are quantum layers.
///
/// The four circuits (named input, update, forget and output) share one
/// down-projection of `[h_prev, x]` onto the qubits and one up-projection from
/// the qubit expectations back to the hidden size. Gate `g` computes
/// `out_proj(circuit_g(in_proj([h, x])))` and the cell recurrence is the usual
/// one, with `update` in the role of the candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct QLstmCell {
    pub in_proj: Linear,
    pub input: Vqc,
    pub update: Vqc,
    pub forget: Vqc,
    pub output: Vqc,
    pub out_proj: Linear,
}

#[derive(Debug, Clone)]
pub struct QLstmCache {
    pub concat: Vec<f64>,
    pub features: Vec<f64>,
    /// Expectations of the forget, input, update and output circuits.
    pub expectations: [Vec<f64>; 4],
    pub gates: GateCache,
}

impl QLstmCell {
    pub fn init<R: Rng + ?Sized>(
        input_dim: usize,
        hidden: usize,
        design: &CircuitDesign,
        rng: &mut R,
    ) -> Result<Self> {
        let n = design.n_qubits;
        Ok(QLstmCell {
            in_proj: Linear::init(input_dim + hidden, n, rng),
            input: Vqc::random(design, rng)?,
            update: Vqc::random(design, rng)?,
            forget: Vqc::random(design, rng)?,
            output: Vqc::random(design, rng)?,
            out_proj: Linear::init(n, hidden, rng),
        })
    }

    pub fn zeros(input_dim: usize, hidden: usize, design: &CircuitDesign) -> Result<Self> {
        let n = design.n_qubits;
        Ok(QLstmCell {
            in_proj: Linear::zeros(input_dim + hidden, n),
            input: Vqc::zeros(design)?,
            update: Vqc::zeros(design)?,
            forget: Vqc::zeros(design)?,
            output: Vqc::zeros(design)?,
            out_proj: Linear::zeros(n, hidden),
        })
    }

    pub fn hidden(&self) -> usize {
        self.out_proj.output_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.in_proj.input_dim() - self.hidden()
    }

    pub fn design(&self) -> &CircuitDesign {
        self.input.design()
    }

    /// Qubits across the four gate circuits.
    pub fn qubit_count(&self) -> usize {
        self.circuits().iter().map(|c| c.n_qubits()).sum()
    }

    /// Circuits in recurrence order: forget, input, update, output.
    fn circuits(&self) -> [&Vqc; 4] {
        [&self.forget, &self.input, &self.update, &self.output]
    }

    pub fn forward(
        &self,
        x: &[f64],
        h_prev: &[f64],
        c_prev: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>, QLstmCache)> {
        let hid = self.hidden();
        dim_check(
            x.len() == self.input_dim() && h_prev.len() == hid && c_prev.len() == hid,
            || {
                format!(
                    "cell expects input {} / hidden {hid}, got x {} h {} c {}",
                    self.input_dim(),
                    x.len(),
                    h_prev.len(),
                    c_prev.len()
                )
            },
        )?;
        let concat = [h_prev, x].concat();
        let features = self.in_proj.forward(&concat);
        let mut expectations: [Vec<f64>; 4] = Default::default();
        let mut z: [Vec<f64>; 4] = Default::default();
        for (k, c) in self.circuits().into_iter().enumerate() {
            expectations[k] = c.forward(&features)?;
            z[k] = self.out_proj.forward(&expectations[k]);
        }
        let (h, c, gates) = lstm_combine(&z[0], &z[1], &z[2], &z[3], c_prev);
        Ok((
            h,
            c,
            QLstmCache {
                concat,
                features,
                expectations,
                gates,
            },
        ))
    }

    /// Accumulates parameter gradients into `grad`; returns
    /// `(∂L/∂x, ∂L/∂h_prev, ∂L/∂c_prev)`.
    pub fn backward(
        &self,
        cache: &QLstmCache,
        dh: &[f64],
        dc: &[f64],
        grad: &mut QLstmCell,
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let (dz, dc_prev) = lstm_combine_backward(&cache.gates, dh, dc);
        let mut dfeatures = vec![0.0; cache.features.len()];
        let grads = [
            &mut grad.forget.theta,
            &mut grad.input.theta,
            &mut grad.update.theta,
            &mut grad.output.theta,
        ];
        for (k, (circuit, gtheta)) in self.circuits().into_iter().zip(grads).enumerate() {
            let de = self
                .out_proj
                .backward(&cache.expectations[k], &dz[k], &mut grad.out_proj);
            let d = circuit.backward(&cache.features, &de, gtheta)?;
            for (a, b) in dfeatures.iter_mut().zip(d) {
                *a += b;
            }
        }
        let mut dconcat = self
            .in_proj
            .backward(&cache.concat, &dfeatures, &mut grad.in_proj);
        let dx = dconcat.split_off(self.hidden());
        Ok((dx, dconcat, dc_prev))
    }
}

impl Parameterized for QLstmCell {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        self.in_proj.collect(&join_name(prefix, "in_proj"), out);
        self.input.collect(&join_name(prefix, "input"), out);
        self.update.collect(&join_name(prefix, "update"), out);
        self.forget.collect(&join_name(prefix, "forget"), out);
        self.output.collect(&join_name(prefix, "output"), out);
        self.out_proj.collect(&join_name(prefix, "out_proj"), out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.in_proj.collect_mut(out);
        self.input.collect_mut(out);
        self.update.collect_mut(out);
        self.forget.collect_mut(out);
        self.output.collect_mut(out);
        self.out_proj.collect_mut(out);
    }
}

/// One QLSTM step, `(h_t, c_t)`.
pub fn qlstm_cell(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    cell: &QLstmCell,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (h, c, _) = cell.forward(x, h_prev, c_prev)?;
    Ok((h, c))
}
