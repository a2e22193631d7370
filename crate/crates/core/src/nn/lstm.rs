use rand::Rng;

use super::activation::{sigmoid, tanh};
use super::linear::Linear;
use super::tensor::{join_name, NamedTensor, Parameterized};
use crate::error::{dim_check, Result};

/// Activated gate values of one step, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct GateCache {
    pub forget: Vec<f64>,
    pub input: Vec<f64>,
    pub candidate: Vec<f64>,
    pub output: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

/// The recurrence shared by the classical and quantum cells: given gate
/// pre-activations, `c = σ(z_f)∘c_prev + σ(z_i)∘tanh(z_C)` and
/// `h = σ(z_o)∘tanh(c)`.
pub fn lstm_combine(
    z_forget: &[f64],
    z_input: &[f64],
    z_candidate: &[f64],
    z_output: &[f64],
    c_prev: &[f64],
) -> (Vec<f64>, Vec<f64>, GateCache) {
    let forget: Vec<f64> = z_forget.iter().map(|&z| sigmoid(z)).collect();
    let input: Vec<f64> = z_input.iter().map(|&z| sigmoid(z)).collect();
    let candidate: Vec<f64> = z_candidate.iter().map(|&z| tanh(z)).collect();
    let output: Vec<f64> = z_output.iter().map(|&z| sigmoid(z)).collect();
    let c: Vec<f64> = (0..c_prev.len())
        .map(|k| forget[k] * c_prev[k] + input[k] * candidate[k])
        .collect();
    let tanh_c: Vec<f64> = c.iter().map(|&v| v.tanh()).collect();
    let h = output.iter().zip(&tanh_c).map(|(o, t)| o * t).collect();
    let cache = GateCache {
        forget,
        input,
        candidate,
        output,
        c_prev: c_prev.to_vec(),
        tanh_c,
    };
    (h, c, cache)
}

/// Returns gradients of the four pre-activations (forget, input, candidate,
/// output) and of `c_prev`.
pub fn lstm_combine_backward(
    cache: &GateCache,
    dh: &[f64],
    dc: &[f64],
) -> ([Vec<f64>; 4], Vec<f64>) {
    let n = dh.len();
    let mut dz = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut dc_prev = vec![0.0; n];
    for k in 0..n {
        let (f, i, g, o, t) = (
            cache.forget[k],
            cache.input[k],
            cache.candidate[k],
            cache.output[k],
            cache.tanh_c[k],
        );
        let d_o = dh[k] * t;
        let dc_total = dc[k] + dh[k] * o * (1.0 - t * t);
        dz[0][k] = dc_total * cache.c_prev[k] * f * (1.0 - f);
        dz[1][k] = dc_total * g * i * (1.0 - i);
        dz[2][k] = dc_total * i * (1.0 - g * g);
        dz[3][k] = d_o * o * (1.0 - o);
        dc_prev[k] = dc_total * f;
    }
    (dz, dc_prev)
}

/// Classical LSTM cell. Every gate maps `[h_prev, x]` (hidden first) through
/// its own affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCell {
    pub forget: Linear,
    pub input: Linear,
    pub candidate: Linear,
    pub output: Linear,
}

#[derive(Debug, Clone)]
pub struct LstmCache {
    pub concat: Vec<f64>,
    pub gates: GateCache,
}

impl LstmCell {
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let fan = input_dim + hidden;
        LstmCell {
            forget: Linear::init(fan, hidden, rng),
            input: Linear::init(fan, hidden, rng),
            candidate: Linear::init(fan, hidden, rng),
            output: Linear::init(fan, hidden, rng),
        }
    }

    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        let fan = input_dim + hidden;
        LstmCell {
            forget: Linear::zeros(fan, hidden),
            input: Linear::zeros(fan, hidden),
            candidate: Linear::zeros(fan, hidden),
            output: Linear::zeros(fan, hidden),
        }
    }

    pub fn hidden(&self) -> usize {
        self.forget.output_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.forget.input_dim() - self.hidden()
    }

    fn gates(&self) -> [&Linear; 4] {
        [&self.forget, &self.input, &self.candidate, &self.output]
    }

    pub fn check(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<()> {
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
        dim_check(
            self.gates()
                .iter()
                .all(|g| g.input_dim() == hid + self.input_dim() && g.output_dim() == hid),
            || "gate layers disagree on shape".to_string(),
        )
    }

    pub fn forward(
        &self,
        x: &[f64],
        h_prev: &[f64],
        c_prev: &[f64],
    ) -> (Vec<f64>, Vec<f64>, LstmCache) {
        let concat = [h_prev, x].concat();
        let [f, i, g, o] = self.gates().map(|l| l.forward(&concat));
        let (h, c, gates) = lstm_combine(&f, &i, &g, &o, c_prev);
        (h, c, LstmCache { concat, gates })
    }

    /// Accumulates parameter gradients into `grad`; returns
    /// `(∂L/∂x, ∂L/∂h_prev, ∂L/∂c_prev)`.
    pub fn backward(
        &self,
        cache: &LstmCache,
        dh: &[f64],
        dc: &[f64],
        grad: &mut LstmCell,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (dz, dc_prev) = lstm_combine_backward(&cache.gates, dh, dc);
        let grads = [
            &mut grad.forget,
            &mut grad.input,
            &mut grad.candidate,
            &mut grad.output,
        ];
        let mut dconcat = vec![0.0; cache.concat.len()];
        for ((layer, g), dz) in self.gates().into_iter().zip(grads).zip(&dz) {
            let d = layer.backward(&cache.concat, dz, g);
            for (a, b) in dconcat.iter_mut().zip(d) {
                *a += b;
            }
        }
        let dx = dconcat.split_off(self.hidden());
        (dx, dconcat, dc_prev)
    }
}

impl Parameterized for LstmCell {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        self.forget.collect(&join_name(prefix, "forget"), out);
        self.input.collect(&join_name(prefix, "input"), out);
        self.candidate.collect(&join_name(prefix, "candidate"), out);
        self.output.collect(&join_name(prefix, "output"), out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.forget.collect_mut(out);
        self.input.collect_mut(out);
        self.candidate.collect_mut(out);
        self.output.collect_mut(out);
    }
}

/// One LSTM step, `(h_t, c_t)`.
pub fn lstm_cell(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    weights: &LstmCell,
) -> Result<(Vec<f64>, Vec<f64>)> {
    weights.check(x, h_prev, c_prev)?;
    let (h, c, _) = weights.forward(x, h_prev, c_prev);
    Ok((h, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Tensor2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar(wh: f64, wx: f64, b: f64) -> Linear {
        Linear::new(Tensor2::from_rows(&[vec![wh], vec![wx]]).unwrap(), vec![b]).unwrap()
    }

    #[test]
    fn zero_weights_give_zero_hidden() {
        let cell = LstmCell::zeros(3, 2);
        let (h, c) = lstm_cell(&[1.0, -2.0, 0.5], &[0.3, 0.1], &[0.0, 0.0], &cell).unwrap();
        assert_eq!(h, vec![0.0, 0.0]);
        assert_eq!(c, vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_hand_trace() {
        let cell = LstmCell {
            forget: scalar(0.1, 0.2, 0.0),
            input: scalar(0.3, -0.1, 0.1),
            candidate: scalar(0.5, 0.5, 0.0),
            output: scalar(-0.2, 0.4, 0.0),
        };
        let (h, c) = lstm_cell(&[1.0], &[0.5], &[0.2], &cell).unwrap();
        assert!((h[0] - 0.24414031832122113).abs() < 1e-14);
        assert!((c[0] - 0.45378330342890405).abs() < 1e-14);
    }

    #[test]
    fn dimension_errors() {
        let cell = LstmCell::zeros(3, 2);
        assert!(lstm_cell(&[1.0], &[0.0, 0.0], &[0.0, 0.0], &cell).is_err());
        assert!(lstm_cell(&[1.0; 3], &[0.0], &[0.0, 0.0], &cell).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cell = LstmCell::init(3, 2, &mut rng);
        let x = vec![0.4, -0.9, 0.2];
        let h0 = vec![0.1, -0.3];
        let c0 = vec![0.5, -0.2];
        let (wh, wc) = ([0.7, -1.1], [0.3, 0.9]);
        let loss = |cell: &LstmCell, x: &[f64], h0: &[f64], c0: &[f64]| -> f64 {
            let (h, c, _) = cell.forward(x, h0, c0);
            h.iter().zip(&wh).map(|(a, b)| a * b).sum::<f64>()
                + c.iter().zip(&wc).map(|(a, b)| a * b).sum::<f64>()
        };
        let (_, _, cache) = cell.forward(&x, &h0, &c0);
        let mut grad = cell.zeros_like();
        let (dx, dh0, dc0) = cell.backward(&cache, &wh, &wc, &mut grad);

        let h = 1e-5;
        let rel = |fd: f64, an: f64| (fd - an).abs() <= 1e-5 * fd.abs().max(1.0);
        let flat = cell.flatten();
        let g = grad.flatten();
        for k in 0..flat.len() {
            let (mut p, mut m) = (cell.clone(), cell.clone());
            let mut fp = flat.clone();
            fp[k] += h;
            p.assign_flat(&fp).unwrap();
            fp[k] -= 2.0 * h;
            m.assign_flat(&fp).unwrap();
            let fd = (loss(&p, &x, &h0, &c0) - loss(&m, &x, &h0, &c0)) / (2.0 * h);
            assert!(rel(fd, g[k]), "param {k}: {fd} vs {}", g[k]);
        }
        for (vec, an) in [(&x, &dx), (&h0, &dh0), (&c0, &dc0)] {
            for k in 0..vec.len() {
                let mut vp = vec.clone();
                vp[k] += h;
                let mut vm = vec.clone();
                vm[k] -= h;
                let (fp, fm) = if std::ptr::eq(vec, &x) {
                    (loss(&cell, &vp, &h0, &c0), loss(&cell, &vm, &h0, &c0))
                } else if std::ptr::eq(vec, &h0) {
                    (loss(&cell, &x, &vp, &c0), loss(&cell, &x, &vm, &c0))
                } else {
                    (loss(&cell, &x, &h0, &vp), loss(&cell, &x, &h0, &vm))
                };
                assert!(rel((fp - fm) / (2.0 * h), an[k]));
            }
        }
    }
}
