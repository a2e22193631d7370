use rand::Rng;

use super::tensor::{join_name, NamedTensor, Parameterized, Tensor2};
use crate::error::{dim_check, Result};

/// `y = x·W + b` with `W` of shape `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub w: Tensor2,
    pub b: Vec<f64>,
}

impl Linear {
    pub fn new(w: Tensor2, b: Vec<f64>) -> Result<Self> {
        dim_check(w.cols() == b.len(), || {
            format!("bias length {} for {} outputs", b.len(), w.cols())
        })?;
        Ok(Linear { w, b })
    }

    pub fn zeros(input: usize, output: usize) -> Self {
        Linear {
            w: Tensor2::zeros(input, output),
            b: vec![0.0; output],
        }
    }

    /// Uniform `±1/√fan_in` initialization of both weights and bias.
    pub fn init<R: Rng + ?Sized>(input: usize, output: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (input.max(1) as f64).sqrt();
        let w = Tensor2::uniform(input, output, bound, rng);
        let b = (0..output).map(|_| rng.gen_range(-bound..bound)).collect();
        Linear { w, b }
    }

    pub fn input_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.w.vecmul(x);
        for (y, b) in y.iter_mut().zip(&self.b) {
            *y += b;
        }
        y
    }

    pub fn try_forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        dim_check(x.len() == self.input_dim(), || {
            format!(
                "input length {} for a {}-input layer",
                x.len(),
                self.input_dim()
            )
        })?;
        Ok(self.forward(x))
    }

    /// Accumulates `∂L/∂W` and `∂L/∂b` into `grad`; returns `∂L/∂x`.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Linear) -> Vec<f64> {
        grad.w.add_outer(x, dy);
        for (g, d) in grad.b.iter_mut().zip(dy) {
            *g += d;
        }
        self.w.mul_transposed(dy)
    }
}

impl Parameterized for Linear {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        self.w.collect(&join_name(prefix, "weight"), out);
        out.push(NamedTensor {
            name: join_name(prefix, "bias"),
            shape: vec![self.b.len()],
            values: &self.b,
        });
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.w.collect_mut(out);
        out.push(&mut self.b);
    }
}

pub fn linear_forward(x: &[f64], w: &Tensor2, b: &[f64]) -> Result<Vec<f64>> {
    Linear::new(w.clone(), b.to_vec())?.try_forward(x)
}

/// Returns `(∂L/∂x, ∂L/∂W, ∂L/∂b)` for `y = x·W + b`.
pub fn linear_backward(
    x: &[f64],
    w: &Tensor2,
    upstream: &[f64],
) -> Result<(Vec<f64>, Tensor2, Vec<f64>)> {
    dim_check(x.len() == w.rows() && upstream.len() == w.cols(), || {
        format!(
            "x has {} entries and upstream {} for a {}×{} weight",
            x.len(),
            upstream.len(),
            w.rows(),
            w.cols()
        )
    })?;
    let layer = Linear {
        w: w.clone(),
        b: vec![0.0; w.cols()],
    };
    let mut grad = layer.zeros_like();
    let dx = layer.backward(x, upstream, &mut grad);
    Ok((dx, grad.w, grad.b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forward_examples() {
        let eye = Tensor2::identity(2);
        assert_eq!(
            linear_forward(&[1.0, 2.0], &eye, &[0.0, 0.0]).unwrap(),
            vec![1.0, 2.0]
        );
        let w = Tensor2::from_rows(&[vec![2.0, 3.0], vec![4.0, 5.0]]).unwrap();
        assert_eq!(
            linear_forward(&[1.0, 1.0], &w, &[1.0, 1.0]).unwrap(),
            vec![7.0, 9.0]
        );
        assert!(linear_forward(&[1.0], &w, &[1.0, 1.0]).is_err());
        assert!(linear_forward(&[1.0, 1.0], &w, &[1.0]).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let layer = Linear::init(3, 4, &mut rng);
        let x = [0.3, -0.7, 1.1];
        let up = [0.5, -1.0, 0.25, 2.0];
        let loss = |l: &Linear, x: &[f64]| -> f64 {
            l.forward(x).iter().zip(&up).map(|(a, b)| a * b).sum()
        };
        let (dx, dw, db) = linear_backward(&x, &layer.w, &up).unwrap();
        let h = 1e-5;
        for i in 0..3 {
            let (mut xp, mut xm) = (x, x);
            xp[i] += h;
            xm[i] -= h;
            let fd = (loss(&layer, &xp) - loss(&layer, &xm)) / (2.0 * h);
            assert!((fd - dx[i]).abs() < 1e-6);
        }
        for r in 0..3 {
            for c in 0..4 {
                let mut lp = layer.clone();
                lp.w.set(r, c, layer.w.get(r, c) + h);
                let mut lm = layer.clone();
                lm.w.set(r, c, layer.w.get(r, c) - h);
                let fd = (loss(&lp, &x) - loss(&lm, &x)) / (2.0 * h);
                assert!((fd - dw.get(r, c)).abs() < 1e-6);
            }
        }
        assert_eq!(db, up.to_vec());
    }
}
