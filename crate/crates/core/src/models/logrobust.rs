use super::qattention::{SelfAttention, SelfAttentionCache};
use super::recurrent::{Recurrent, StepCache};
use crate::error::{dim_check, Result};
use crate::nn::{
    binary_cross_entropy, join_name, sigmoid, softmax, softmax_backward, Linear, NamedTensor,
    Parameterized, Tensor2,
};

/// Supervised window classifier: event embeddings, a bidirectional (Q)LSTM,
/// self-attention over time steps, attention-weighted pooling with a learned
/// query vector, and a sigmoid head giving the anomaly probability.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRobustModel {
    /// One row per event class.
    pub embedding: Tensor2,
    pub forward_rnn: Recurrent,
    pub backward_rnn: Recurrent,
    pub attention: SelfAttention,
    /// Pooling query, `1 × d_v`.
    pub pool: Tensor2,
    pub head: Linear,
}

#[derive(Debug, Clone)]
pub struct LogRobustCache {
    classes: Vec<usize>,
    fwd: Vec<StepCache>,
    bwd: Vec<StepCache>,
    att: SelfAttentionCache,
    out: Tensor2,
    alpha: Vec<f64>,
    pooled: Vec<f64>,
    p: f64,
}

impl LogRobustModel {
    pub fn n_classes(&self) -> usize {
        self.embedding.rows()
    }

    pub fn qubit_count(&self) -> usize {
        self.forward_rnn.qubit_count()
            + self.backward_rnn.qubit_count()
            + self.attention.qubit_count()
    }

    pub fn forward(&self, classes: &[usize]) -> Result<(f64, LogRobustCache)> {
        dim_check(!classes.is_empty(), || "empty window".into())?;
        dim_check(classes.iter().all(|&c| c < self.n_classes()), || {
            format!(
                "event class outside the {}-class embedding",
                self.n_classes()
            )
        })?;
        let k = classes.len();
        let xs: Vec<Vec<f64>> = classes
            .iter()
            .map(|&c| self.embedding.row(c).to_vec())
            .collect();
        let (hf, fwd) = self.forward_rnn.run(&xs)?;
        let rev: Vec<Vec<f64>> = xs.iter().rev().cloned().collect();
        let (hb, bwd) = self.backward_rnn.run(&rev)?;
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|t| [hf[t].as_slice(), &hb[k - 1 - t]].concat())
            .collect();
        let a = Tensor2::from_rows(&rows)?;
        let (out, att) = self.attention.forward(&a)?;
        let query = self.pool.row(0);
        let scores: Vec<f64> = (0..k)
            .map(|t| out.row(t).iter().zip(query).map(|(a, b)| a * b).sum())
            .collect();
        let alpha = softmax(&scores);
        let mut pooled = vec![0.0; out.cols()];
        for (t, &w) in alpha.iter().enumerate() {
            for (p, o) in pooled.iter_mut().zip(out.row(t)) {
                *p += w * o;
            }
        }
        let p = sigmoid(self.head.forward(&pooled)[0]);
        Ok((
            p,
            LogRobustCache {
                classes: classes.to_vec(),
                fwd,
                bwd,
                att,
                out,
                alpha,
                pooled,
                p,
            },
        ))
    }

    /// Anomaly probability of a window of class indices.
    pub fn classify(&self, classes: &[usize]) -> Result<f64> {
        Ok(self.forward(classes)?.0)
    }

    /// Accumulates parameter gradients for `∂L/∂p = dp` into `grad`.
    pub fn backward(
        &self,
        cache: &LogRobustCache,
        dp: f64,
        grad: &mut LogRobustModel,
    ) -> Result<()> {
        let k = cache.classes.len();
        let dlogit = dp * cache.p * (1.0 - cache.p);
        let dpooled = self.head.backward(&cache.pooled, &[dlogit], &mut grad.head);

        let out = &cache.out;
        let query = self.pool.row(0);
        let dalpha: Vec<f64> = (0..k)
            .map(|t| out.row(t).iter().zip(&dpooled).map(|(a, b)| a * b).sum())
            .collect();
        let dscores = softmax_backward(&cache.alpha, &dalpha);
        let mut d_out = Tensor2::zeros(k, out.cols());
        for t in 0..k {
            let row = d_out.row_mut(t);
            for c in 0..row.len() {
                row[c] = cache.alpha[t] * dpooled[c] + dscores[t] * query[c];
            }
            for (g, o) in grad.pool.row_mut(0).iter_mut().zip(out.row(t)) {
                *g += dscores[t] * o;
            }
        }

        let da = self
            .attention
            .backward(&cache.att, &d_out, &mut grad.attention)?;
        let hid = self.forward_rnn.hidden();
        let dhf: Vec<Vec<f64>> = (0..k).map(|t| da.row(t)[..hid].to_vec()).collect();
        let dhb_rev: Vec<Vec<f64>> = (0..k).map(|t| da.row(k - 1 - t)[hid..].to_vec()).collect();
        let dxf = self
            .forward_rnn
            .run_backward(&cache.fwd, &dhf, &mut grad.forward_rnn)?;
        let dxb_rev =
            self.backward_rnn
                .run_backward(&cache.bwd, &dhb_rev, &mut grad.backward_rnn)?;
        for t in 0..k {
            let row = grad.embedding.row_mut(cache.classes[t]);
            for (c, g) in row.iter_mut().enumerate() {
                *g += dxf[t][c] + dxb_rev[k - 1 - t][c];
            }
        }
        Ok(())
    }

    /// Binary cross-entropy with `anomaly` as the positive class.
    pub fn loss_and_grad(
        &self,
        classes: &[usize],
        anomaly: bool,
        grad: &mut LogRobustModel,
    ) -> Result<f64> {
        let (p, cache) = self.forward(classes)?;
        let (loss, dp) = binary_cross_entropy(p, f64::from(u8::from(anomaly)));
        self.backward(&cache, dp, grad)?;
        Ok(loss)
    }

    pub fn loss(&self, classes: &[usize], anomaly: bool) -> Result<f64> {
        Ok(binary_cross_entropy(self.classify(classes)?, f64::from(u8::from(anomaly))).0)
    }
}

impl Parameterized for LogRobustModel {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        self.embedding.collect(&join_name(prefix, "embedding"), out);
        self.forward_rnn
            .collect(&join_name(prefix, "lstm_fwd"), out);
        self.backward_rnn
            .collect(&join_name(prefix, "lstm_bwd"), out);
        self.attention.collect(&join_name(prefix, "attention"), out);
        self.pool.collect(&join_name(prefix, "pool"), out);
        self.head.collect(&join_name(prefix, "head"), out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.embedding.collect_mut(out);
        self.forward_rnn.collect_mut(out);
        self.backward_rnn.collect_mut(out);
        self.attention.collect_mut(out);
        self.pool.collect_mut(out);
        self.head.collect_mut(out);
    }
}

/// Anomaly probability for a window of class indices.
pub fn logrobust_classify(classes: &[usize], model: &LogRobustModel) -> Result<f64> {
    model.classify(classes)
}
