use super::activation::softmax;
use crate::error::{Error, Result};

/// Probabilities are clamped to `[BCE_CLAMP, 1 − BCE_CLAMP]`.
pub const BCE_CLAMP: f64 = 1e-7;

/// `−log softmax(logits)[target]` and its gradient `softmax − onehot`.
pub fn softmax_cross_entropy(logits: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    if target >= logits.len() {
        return Err(Error::Precondition(format!(
            "target class {target} out of range for {} logits",
            logits.len()
        )));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
    let loss = lse - logits[target];
    let mut grad = softmax(logits);
    grad[target] -= 1.0;
    Ok((loss, grad))
}

/// `−[y·ln p + (1−y)·ln(1−p)]` with `p` clamped; returns `(loss, ∂L/∂p)`.
pub fn binary_cross_entropy(p: f64, y: f64) -> (f64, f64) {
    let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
    let loss = -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
    let grad = -y / p + (1.0 - y) / (1.0 - p);
    (loss, grad)
}
