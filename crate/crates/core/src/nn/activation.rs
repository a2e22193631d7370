#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Tanh,
    Softmax,
}

impl Activation {
    pub fn forward(self, x: &[f64]) -> Vec<f64> {
        match self {
            Activation::Sigmoid => x.iter().map(|&v| sigmoid(v)).collect(),
            Activation::Tanh => x.iter().map(|&v| tanh(v)).collect(),
            Activation::Softmax => softmax(x),
        }
    }

    /// Gradient with respect to the input, given the forward output `y`.
    pub fn backward(self, y: &[f64], dy: &[f64]) -> Vec<f64> {
        match self {
            Activation::Sigmoid => y
                .iter()
                .zip(dy)
                .map(|(&y, &d)| sigmoid_backward(y, d))
                .collect(),
            Activation::Tanh => y
                .iter()
                .zip(dy)
                .map(|(&y, &d)| tanh_backward(y, d))
                .collect(),
            Activation::Softmax => softmax_backward(y, dy),
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid_backward(y: f64, dy: f64) -> f64 {
    dy * y * (1.0 - y)
}

pub fn tanh(x: f64) -> f64 {
    x.tanh()
}

pub fn tanh_backward(y: f64, dy: f64) -> f64 {
    dy * (1.0 - y * y)
}

/// Softmax with max subtraction.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `∂L/∂x` for `y = softmax(x)`: `y ∘ (dy − ⟨y, dy⟩)`.
pub fn softmax_backward(y: &[f64], dy: &[f64]) -> Vec<f64> {
    let dot: f64 = y.iter().zip(dy).map(|(a, b)| a * b).sum();
    y.iter().zip(dy).map(|(&y, &d)| y * (d - dot)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(tanh(0.0), 0.0);
        assert_eq!(softmax(&[1.0; 4]), vec![0.25; 4]);
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(-800.0).is_finite());
        assert_eq!(sigmoid(800.0), 1.0);
    }

    #[test]
    fn backward_finite_differences() {
        let x = [0.3, -1.2, 0.8];
        let dy = [1.0, -0.5, 2.0];
        let h = 1e-5;
        for act in [Activation::Sigmoid, Activation::Tanh, Activation::Softmax] {
            let y = act.forward(&x);
            let g = act.backward(&y, &dy);
            for i in 0..3 {
                let (mut xp, mut xm) = (x, x);
                xp[i] += h;
                xm[i] -= h;
                let f =
                    |v: &[f64]| -> f64 { act.forward(v).iter().zip(&dy).map(|(a, b)| a * b).sum() };
                let fd = (f(&xp) - f(&xm)) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-5 * fd.abs().max(1.0), "{act:?} {i}");
            }
        }
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(x in prop::collection::vec(-1e3f64..1e3, 1..16)) {
            let y = softmax(&x);
            prop_assert!(y.iter().all(|&p| p >= 0.0));
            prop_assert!((y.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}
