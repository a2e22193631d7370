//! Next-event prediction (DeepLog, LogAnomaly) and top-g detection.

use std::collections::HashMap;

use rand::Rng;

use super::recurrent::Recurrent;
use crate::error::{dim_check, Result};
use crate::logpipe::{count_vectors, one_hot, VectorScheme};
use crate::nn::{join_name, softmax_cross_entropy, Linear, NamedTensor, Parameterized};

/// A (Q)LSTM unrolled over the history, with a linear head from the last
/// hidden state to one logit per event class.
#[derive(Debug, Clone, PartialEq)]
pub struct NextEventModel {
    pub recurrent: Recurrent,
    pub head: Linear,
}

impl NextEventModel {
    pub fn new(recurrent: Recurrent, n_classes: usize, rng: &mut impl Rng) -> Self {
        let head = Linear::init(recurrent.hidden(), n_classes, rng);
        NextEventModel { recurrent, head }
    }

    pub fn n_classes(&self) -> usize {
        self.head.output_dim()
    }

    pub fn logits(&self, history: &[Vec<f64>]) -> Result<Vec<f64>> {
        dim_check(!history.is_empty(), || "empty history".into())?;
        let (hs, _) = self.recurrent.run(history)?;
        Ok(self.head.forward(hs.last().expect("non-empty")))
    }

    /// Cross-entropy against `target`; gradients are added into `grad`.
    pub fn loss_and_grad(
        &self,
        history: &[Vec<f64>],
        target: usize,
        grad: &mut NextEventModel,
    ) -> Result<f64> {
        dim_check(!history.is_empty(), || "empty history".into())?;
        let (hs, caches) = self.recurrent.run(history)?;
        let last = hs.last().expect("non-empty");
        let logits = self.head.forward(last);
        let (loss, dlogits) = softmax_cross_entropy(&logits, target)?;
        let dh = self.head.backward(last, &dlogits, &mut grad.head);
        let mut dhs = vec![Vec::new(); hs.len()];
        *dhs.last_mut().expect("non-empty") = dh;
        self.recurrent
            .run_backward(&caches, &dhs, &mut grad.recurrent)?;
        Ok(loss)
    }

    pub fn loss(&self, history: &[Vec<f64>], target: usize) -> Result<f64> {
        Ok(softmax_cross_entropy(&self.logits(history)?, target)?.0)
    }
}

impl Parameterized for NextEventModel {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        self.recurrent.collect(&join_name(prefix, "lstm"), out);
        self.head.collect(&join_name(prefix, "head"), out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.recurrent.collect_mut(out);
        self.head.collect_mut(out);
    }
}

/// Logits over event classes for a history.
pub fn next_event_forward(history: &[Vec<f64>], model: &NextEventModel) -> Result<Vec<f64>> {
    model.logits(history)
}

/// Sequential and quantitative next-event models over one vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LogAnomalyModel {
    pub sequential: NextEventModel,
    pub quantitative: NextEventModel,
}

impl Parameterized for LogAnomalyModel {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        self.sequential
            .collect(&join_name(prefix, "sequential"), out);
        self.quantitative
            .collect(&join_name(prefix, "quantitative"), out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.sequential.collect_mut(out);
        self.quantitative.collect_mut(out);
    }
}

/// Per-position model inputs for a window of class indices.
pub fn window_inputs(
    classes: &[usize],
    scheme: VectorScheme,
    n_classes: usize,
    history: usize,
) -> Vec<Vec<f64>> {
    match scheme {
        VectorScheme::Count => count_vectors(classes, n_classes, history),
        VectorScheme::OneHot => classes.iter().map(|&c| one_hot(c, n_classes)).collect(),
        VectorScheme::EmbeddingIds => classes.iter().map(|&c| vec![c as f64]).collect(),
    }
}

/// The slice of `classes` that fully determines the inputs used to predict
/// position `j`. Equal contexts give equal inputs, so they can share one
/// model evaluation.
pub fn context_key(classes: &[usize], j: usize, scheme: VectorScheme, history: usize) -> &[usize] {
    match scheme {
        VectorScheme::Count => &classes[(j + 1).saturating_sub(2 * history)..j],
        _ => &classes[j - history..j],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Normal,
    Anomaly,
}

impl Verdict {
    pub fn is_anomaly(self) -> bool {
        self == Verdict::Anomaly
    }
}

/// Anything producing one score per event class from a history.
pub trait NextEventPredictor {
    fn scores(&self, history: &[Vec<f64>]) -> Result<Vec<f64>>;
}

impl NextEventPredictor for NextEventModel {
    fn scores(&self, history: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.logits(history)
    }
}

impl<T: NextEventPredictor + ?Sized> NextEventPredictor for &T {
    fn scores(&self, history: &[Vec<f64>]) -> Result<Vec<f64>> {
        (**self).scores(history)
    }
}

/// `target` is among the `g` best candidates when fewer than `g` classes
/// score strictly higher.
pub fn in_top_g(scores: &[f64], target: usize, g: usize) -> bool {
    let s = scores.get(target).copied().unwrap_or(f64::NEG_INFINITY);
    scores.iter().filter(|&&v| v > s).count() < g
}

/// Top-g detector with a score cache keyed by context, so repeated contexts
/// across windows cost one model evaluation.
#[derive(Debug)]
pub struct TopGDetector<P> {
    predictor: P,
    scheme: VectorScheme,
    n_classes: usize,
    history: usize,
    g: usize,
    cache: HashMap<Vec<usize>, Vec<f64>>,
}

impl<P: NextEventPredictor> TopGDetector<P> {
    pub fn new(
        predictor: P,
        scheme: VectorScheme,
        n_classes: usize,
        history: usize,
        g: usize,
    ) -> Self {
        TopGDetector {
            predictor,
            scheme,
            n_classes,
            history,
            g,
            cache: HashMap::new(),
        }
    }

    /// `None` when the window is too short to hold one history plus a target.
    pub fn check(&mut self, classes: &[usize]) -> Result<Option<Verdict>> {
        if self.history == 0 || classes.len() < self.history + 1 {
            log::warn!(
                "window of {} events is shorter than history {} + 1; skipped",
                classes.len(),
                self.history
            );
            return Ok(None);
        }
        let inputs = window_inputs(classes, self.scheme, self.n_classes, self.history);
        for j in self.history..classes.len() {
            let key = context_key(classes, j, self.scheme, self.history);
            if !self.cache.contains_key(key) {
                let s = self.predictor.scores(&inputs[j - self.history..j])?;
                self.cache.insert(key.to_vec(), s);
            }
            if !in_top_g(&self.cache[key], classes[j], self.g) {
                return Ok(Some(Verdict::Anomaly));
            }
        }
        Ok(Some(Verdict::Normal))
    }
}

/// DeepLog: a window of class indices is anomalous iff some next event falls
/// outside the top-g predictions from its one-hot history.
pub fn deeplog_detect(
    classes: &[usize],
    model: &NextEventModel,
    history: usize,
    g: usize,
) -> Result<Option<Verdict>> {
    TopGDetector::new(model, VectorScheme::OneHot, model.n_classes(), history, g).check(classes)
}

/// Combines the sequential (one-hot) and quantitative (count-vector) checks;
/// the window is normal only when both pass.
#[derive(Debug)]
pub struct LogAnomalyDetector<P, Q> {
    pub sequential: TopGDetector<P>,
    pub quantitative: TopGDetector<Q>,
}

impl<P: NextEventPredictor, Q: NextEventPredictor> LogAnomalyDetector<P, Q> {
    pub fn new(sequential: P, quantitative: Q, n_classes: usize, history: usize, g: usize) -> Self {
        LogAnomalyDetector {
            sequential: TopGDetector::new(sequential, VectorScheme::OneHot, n_classes, history, g),
            quantitative: TopGDetector::new(
                quantitative,
                VectorScheme::Count,
                n_classes,
                history,
                g,
            ),
        }
    }

    pub fn check(&mut self, classes: &[usize]) -> Result<Option<Verdict>> {
        let seq = self.sequential.check(classes)?;
        if seq != Some(Verdict::Normal) {
            return Ok(seq);
        }
        self.quantitative.check(classes)
    }
}

pub fn loganomaly_detect(
    classes: &[usize],
    model: &LogAnomalyModel,
    history: usize,
    g: usize,
) -> Result<Option<Verdict>> {
    LogAnomalyDetector::new(
        &model.sequential,
        &model.quantitative,
        model.sequential.n_classes(),
        history,
        g,
    )
    .check(classes)
}
