use rand::Rng;

use super::activation::{softmax, softmax_backward};
use super::tensor::{join_name, NamedTensor, Parameterized, Tensor2};
use crate::error::{dim_check, Result};

/// Cache for `softmax(QKᵀ/√d_k)·V`.
#[derive(Debug, Clone)]
pub struct AttentionCache {
    pub q: Tensor2,
    pub k: Tensor2,
    pub v: Tensor2,
    /// Row-stochastic attention weights, `rows(Q) × rows(K)`.
    pub weights: Tensor2,
}

/// `softmax(QKᵀ/√d_k)·V` given already projected `Q`, `K`, `V`.
pub fn attention_core(q: Tensor2, k: Tensor2, v: Tensor2) -> Result<(Tensor2, AttentionCache)> {
    dim_check(q.cols() == k.cols() && k.rows() == v.rows(), || {
        format!(
            "Q {}×{}, K {}×{}, V {}×{}",
            q.rows(),
            q.cols(),
            k.rows(),
            k.cols(),
            v.rows(),
            v.cols()
        )
    })?;
    let scale = 1.0 / (q.cols() as f64).sqrt();
    let mut weights = q.matmul(&k.transpose())?;
    for r in 0..weights.rows() {
        let row = weights.row_mut(r);
        row.iter_mut().for_each(|s| *s *= scale);
        let p = softmax(row);
        row.copy_from_slice(&p);
    }
    let out = weights.matmul(&v)?;
    Ok((out, AttentionCache { q, k, v, weights }))
}

/// Returns `(∂L/∂Q, ∂L/∂K, ∂L/∂V)`.
pub fn attention_core_backward(
    cache: &AttentionCache,
    d_out: &Tensor2,
) -> (Tensor2, Tensor2, Tensor2) {
    let scale = 1.0 / (cache.q.cols() as f64).sqrt();
    let a = &cache.weights;
    let dv = a
        .transpose()
        .matmul(d_out)
        .expect("shapes fixed by forward");
    let da = d_out
        .matmul(&cache.v.transpose())
        .expect("shapes fixed by forward");
    let mut ds = Tensor2::zeros(a.rows(), a.cols());
    for r in 0..a.rows() {
        let g = softmax_backward(a.row(r), da.row(r));
        for (o, v) in ds.row_mut(r).iter_mut().zip(g) {
            *o = v * scale;
        }
    }
    let dq = ds.matmul(&cache.k).expect("shapes fixed by forward");
    let dk = ds
        .transpose()
        .matmul(&cache.q)
        .expect("shapes fixed by forward");
    (dq, dk, dv)
}

/// Self-attention with bias-free projections `Q = X·W_Q`, `K = X·W_K`,
/// `V = X·W_V`.
#[derive(Debug, Clone, PartialEq)]
pub struct Attention {
    pub w_q: Tensor2,
    pub w_k: Tensor2,
    pub w_v: Tensor2,
}

impl Attention {
    pub fn init<R: Rng + ?Sized>(d_model: usize, d_k: usize, d_v: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (d_model.max(1) as f64).sqrt();
        Attention {
            w_q: Tensor2::uniform(d_model, d_k, bound, rng),
            w_k: Tensor2::uniform(d_model, d_k, bound, rng),
            w_v: Tensor2::uniform(d_model, d_v, bound, rng),
        }
    }

    pub fn forward(&self, x: &Tensor2) -> Result<(Tensor2, AttentionCache)> {
        dim_check(
            x.cols() == self.w_q.rows()
                && x.cols() == self.w_k.rows()
                && x.cols() == self.w_v.rows()
                && self.w_q.cols() == self.w_k.cols(),
            || format!("input width {} does not fit the projections", x.cols()),
        )?;
        attention_core(
            x.matmul(&self.w_q)?,
            x.matmul(&self.w_k)?,
            x.matmul(&self.w_v)?,
        )
    }

    /// Accumulates weight gradients into `grad`; returns `∂L/∂X`.
    pub fn backward(
        &self,
        x: &Tensor2,
        cache: &AttentionCache,
        d_out: &Tensor2,
        grad: &mut Attention,
    ) -> Tensor2 {
        let (dq, dk, dv) = attention_core_backward(cache, d_out);
        let xt = x.transpose();
        let mut dx = Tensor2::zeros(x.rows(), x.cols());
        for (w, g, d) in [
            (&self.w_q, &mut grad.w_q, &dq),
            (&self.w_k, &mut grad.w_k, &dk),
            (&self.w_v, &mut grad.w_v, &dv),
        ] {
            let gw = xt.matmul(d).expect("shapes fixed by forward");
            for (a, b) in g.data_mut().iter_mut().zip(gw.data()) {
                *a += b;
            }
            let dxi = d.matmul(&w.transpose()).expect("shapes fixed by forward");
            for (a, b) in dx.data_mut().iter_mut().zip(dxi.data()) {
                *a += b;
            }
        }
        dx
    }
}

impl Parameterized for Attention {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        self.w_q.collect(&join_name(prefix, "w_q"), out);
        self.w_k.collect(&join_name(prefix, "w_k"), out);
        self.w_v.collect(&join_name(prefix, "w_v"), out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.w_q.collect_mut(out);
        self.w_k.collect_mut(out);
        self.w_v.collect_mut(out);
    }
}

pub fn scaled_dot_attention(
    x: &Tensor2,
    w_q: &Tensor2,
    w_k: &Tensor2,
    w_v: &Tensor2,
) -> Result<Tensor2> {
    let att = Attention {
        w_q: w_q.clone(),
        w_k: w_k.clone(),
        w_v: w_v.clone(),
    };
    Ok(att.forward(x)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_row_returns_value_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let att = Attention::init(3, 2, 4, &mut rng);
        let x = Tensor2::from_rows(&[vec![0.2, -0.4, 1.0]]).unwrap();
        let out = att.forward(&x).unwrap().0;
        let v = x.matmul(&att.w_v).unwrap();
        for (a, b) in out.data().iter().zip(v.data()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_hand_oracle() {
        let eye = Tensor2::identity(2);
        let out = scaled_dot_attention(&eye, &eye, &eye, &eye).unwrap();
        let (p, q) = (0.6697615493266569, 0.3302384506733431);
        let expect = [p, q, q, p];
        for (a, b) in out.data().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let att = Attention::init(3, 3, 3, &mut rng);
        let x = Tensor2::uniform(5, 3, 2.0, &mut rng);
        let (_, cache) = att.forward(&x).unwrap();
        for r in 0..5 {
            assert!((cache.weights.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let att = Attention::init(3, 3, 3, &mut rng);
        assert!(att.forward(&Tensor2::zeros(2, 4)).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let att = Attention::init(3, 2, 2, &mut rng);
        let x = Tensor2::uniform(4, 3, 1.0, &mut rng);
        let up = Tensor2::uniform(4, 2, 1.0, &mut rng);
        let loss = |a: &Attention, x: &Tensor2| -> f64 {
            let out = a.forward(x).unwrap().0;
            out.data().iter().zip(up.data()).map(|(p, q)| p * q).sum()
        };
        let (_, cache) = att.forward(&x).unwrap();
        let mut grad = att.zeros_like();
        let dx = att.backward(&x, &cache, &up, &mut grad);
        let h = 1e-5;
        let rel = |fd: f64, an: f64| (fd - an).abs() <= 1e-5 * fd.abs().max(1.0);
        let flat = att.flatten();
        let g = grad.flatten();
        for k in 0..flat.len() {
            let mut fp = flat.clone();
            fp[k] += h;
            let mut p = att.clone();
            p.assign_flat(&fp).unwrap();
            fp[k] -= 2.0 * h;
            let mut m = att.clone();
            m.assign_flat(&fp).unwrap();
            assert!(rel((loss(&p, &x) - loss(&m, &x)) / (2.0 * h), g[k]));
        }
        for k in 0..x.data().len() {
            let mut xp = x.clone();
            xp.data_mut()[k] += h;
            let mut xm = x.clone();
            xm.data_mut()[k] -= h;
            assert!(rel(
                (loss(&att, &xp) - loss(&att, &xm)) / (2.0 * h),
                dx.data()[k]
            ));
        }
    }
}
