use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::qlayer::{QLayer, QLayerCache};
use crate::error::{dim_check, Error, Result};
use crate::nn::{
    attention_core, attention_core_backward, join_name, Attention, AttentionCache, NamedTensor,
    Parameterized, Tensor2,
};
use crate::pqc::CircuitDesign;

/// How the Q, K and V circuits are counted against the qubit budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum QubitAccounting {
    /// The three circuits run one after another on one register.
    #[default]
    SharedRegister,
    /// Each circuit has its own register.
    PerLayer,
}

impl fmt::Display for QubitAccounting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QubitAccounting::SharedRegister => "shared",
            QubitAccounting::PerLayer => "per-layer",
        })
    }
}

impl FromStr for QubitAccounting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "shared" => Ok(QubitAccounting::SharedRegister),
            "per-layer" | "per_layer" => Ok(QubitAccounting::PerLayer),
            other => Err(Error::Config(format!("unknown qubit accounting '{other}'"))),
        }
    }
}

/// Self-attention whose Q, K and V maps are quantum layers without an
/// up-projection, so `d_k = d_v = n_qubits`.
#[derive(Debug, Clone, PartialEq)]
pub struct QAttention {
    pub q: QLayer,
    pub k: QLayer,
    pub v: QLayer,
    pub accounting: QubitAccounting,
}

#[derive(Debug, Clone)]
pub struct QAttentionCache {
    pub q: Vec<QLayerCache>,
    pub k: Vec<QLayerCache>,
    pub v: Vec<QLayerCache>,
    pub core: AttentionCache,
}

fn map_rows(layer: &QLayer, x: &Tensor2) -> Result<(Tensor2, Vec<QLayerCache>)> {
    let mut rows = Vec::with_capacity(x.rows());
    let mut caches = Vec::with_capacity(x.rows());
    for r in 0..x.rows() {
        let (y, c) = layer.forward(x.row(r))?;
        rows.push(y);
        caches.push(c);
    }
    Ok((Tensor2::from_rows(&rows)?, caches))
}

fn backprop_rows(
    layer: &QLayer,
    caches: &[QLayerCache],
    d: &Tensor2,
    grad: &mut QLayer,
    dx: &mut Tensor2,
) -> Result<()> {
    for (r, cache) in caches.iter().enumerate() {
        let g = layer.backward(cache, d.row(r), grad)?;
        for (a, b) in dx.row_mut(r).iter_mut().zip(g) {
            *a += b;
        }
    }
    Ok(())
}

impl QAttention {
    pub fn init<R: Rng + ?Sized>(
        d_model: usize,
        design: &CircuitDesign,
        accounting: QubitAccounting,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(QAttention {
            q: QLayer::init(d_model, design, None, rng)?,
            k: QLayer::init(d_model, design, None, rng)?,
            v: QLayer::init(d_model, design, None, rng)?,
            accounting,
        })
    }

    pub fn zeros(
        d_model: usize,
        design: &CircuitDesign,
        accounting: QubitAccounting,
    ) -> Result<Self> {
        Ok(QAttention {
            q: QLayer::zeros(d_model, design, None)?,
            k: QLayer::zeros(d_model, design, None)?,
            v: QLayer::zeros(d_model, design, None)?,
            accounting,
        })
    }

    pub fn output_dim(&self) -> usize {
        self.v.output_dim()
    }

    pub fn qubit_count(&self) -> usize {
        let layers = [&self.q, &self.k, &self.v];
        match self.accounting {
            QubitAccounting::SharedRegister => {
                layers.iter().map(|l| l.n_qubits()).max().unwrap_or(0)
            }
            QubitAccounting::PerLayer => layers.iter().map(|l| l.n_qubits()).sum(),
        }
    }

    pub fn forward(&self, x: &Tensor2) -> Result<(Tensor2, QAttentionCache)> {
        dim_check(x.cols() == self.q.input_dim(), || {
            format!(
                "input width {} for a {}-wide attention",
                x.cols(),
                self.q.input_dim()
            )
        })?;
        let (q, qc) = map_rows(&self.q, x)?;
        let (k, kc) = map_rows(&self.k, x)?;
        let (v, vc) = map_rows(&self.v, x)?;
        let (out, core) = attention_core(q, k, v)?;
        Ok((
            out,
            QAttentionCache {
                q: qc,
                k: kc,
                v: vc,
                core,
            },
        ))
    }

    /// Accumulates gradients into `grad`; returns `∂L/∂X`.
    pub fn backward(
        &self,
        cache: &QAttentionCache,
        d_out: &Tensor2,
        grad: &mut QAttention,
    ) -> Result<Tensor2> {
        let (dq, dk, dv) = attention_core_backward(&cache.core, d_out);
        let mut dx = Tensor2::zeros(cache.q.len(), self.q.input_dim());
        backprop_rows(&self.q, &cache.q, &dq, &mut grad.q, &mut dx)?;
        backprop_rows(&self.k, &cache.k, &dk, &mut grad.k, &mut dx)?;
        backprop_rows(&self.v, &cache.v, &dv, &mut grad.v, &mut dx)?;
        Ok(dx)
    }
}

impl Parameterized for QAttention {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        self.q.collect(&join_name(prefix, "q"), out);
        self.k.collect(&join_name(prefix, "k"), out);
        self.v.collect(&join_name(prefix, "v"), out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.q.collect_mut(out);
        self.k.collect_mut(out);
        self.v.collect_mut(out);
    }
}

/// Quantum attention over the rows of `x`.
pub fn q_attention(x: &Tensor2, q: &QLayer, k: &QLayer, v: &QLayer) -> Result<Tensor2> {
    let att = QAttention {
        q: q.clone(),
        k: k.clone(),
        v: v.clone(),
        accounting: QubitAccounting::SharedRegister,
    };
    Ok(att.forward(x)?.0)
}

/// Classical or quantum self-attention.
#[derive(Debug, Clone, PartialEq)]
pub enum SelfAttention {
    Classical(Attention),
    Quantum(QAttention),
}

#[derive(Debug, Clone)]
pub enum SelfAttentionCache {
    Classical(Tensor2, AttentionCache),
    Quantum(QAttentionCache),
}

impl SelfAttention {
    pub fn output_dim(&self) -> usize {
        match self {
            SelfAttention::Classical(a) => a.w_v.cols(),
            SelfAttention::Quantum(a) => a.output_dim(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        match self {
            SelfAttention::Classical(_) => 0,
            SelfAttention::Quantum(a) => a.qubit_count(),
        }
    }

    pub fn forward(&self, x: &Tensor2) -> Result<(Tensor2, SelfAttentionCache)> {
        match self {
            SelfAttention::Classical(a) => {
                let (out, cache) = a.forward(x)?;
                Ok((out, SelfAttentionCache::Classical(x.clone(), cache)))
            }
            SelfAttention::Quantum(a) => {
                let (out, cache) = a.forward(x)?;
                Ok((out, SelfAttentionCache::Quantum(cache)))
            }
        }
    }

    pub fn backward(
        &self,
        cache: &SelfAttentionCache,
        d_out: &Tensor2,
        grad: &mut SelfAttention,
    ) -> Result<Tensor2> {
        match (self, cache, grad) {
            (
                SelfAttention::Classical(a),
                SelfAttentionCache::Classical(x, c),
                SelfAttention::Classical(g),
            ) => Ok(a.backward(x, c, d_out, g)),
            (
                SelfAttention::Quantum(a),
                SelfAttentionCache::Quantum(c),
                SelfAttention::Quantum(g),
            ) => a.backward(c, d_out, g),
            _ => unreachable!("attention, cache and gradient variants always agree"),
        }
    }
}

impl Parameterized for SelfAttention {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        match self {
            SelfAttention::Classical(a) => a.collect(prefix, out),
            SelfAttention::Quantum(a) => a.collect(prefix, out),
        }
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        match self {
            SelfAttention::Classical(a) => a.collect_mut(out),
            SelfAttention::Quantum(a) => a.collect_mut(out),
        }
    }
}
