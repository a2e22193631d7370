use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::logpipe::{count_vectors, one_hot, VectorScheme};
use crate::models::{context_key, HybridModel, ModelKind};
use crate::nn::{adam_step, clip_global_norm, AdamState, Parameterized};

/// A window after vocabulary mapping: class indices plus its label.
pub type LabeledWindow = (Vec<usize>, bool);

/// One distinct training example. Windows that share examples (common in
/// repetitive logs) are evaluated once per batch and weighted by multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TrainingUnit {
    /// Predict `target` from the classes preceding it. For the count-vector
    /// model the context also covers the counting span.
    NextEvent {
        context: Vec<usize>,
        target: usize,
    },
    Window {
        classes: Vec<usize>,
        anomaly: bool,
    },
}

#[derive(Debug, Default, Clone)]
pub struct UnitTable {
    units: Vec<TrainingUnit>,
    index: HashMap<TrainingUnit, usize>,
}

impl UnitTable {
    pub fn intern(&mut self, unit: TrainingUnit) -> usize {
        if let Some(&id) = self.index.get(&unit) {
            return id;
        }
        let id = self.units.len();
        self.index.insert(unit.clone(), id);
        self.units.push(unit);
        id
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn get(&self, id: usize) -> &TrainingUnit {
        &self.units[id]
    }

    /// Unit ids contributed by one window.
    pub fn add_window(
        &mut self,
        kind: ModelKind,
        window: &LabeledWindow,
        history: usize,
    ) -> Vec<usize> {
        let (classes, anomaly) = window;
        match kind {
            ModelKind::LogRobust => vec![self.intern(TrainingUnit::Window {
                classes: classes.clone(),
                anomaly: *anomaly,
            })],
            ModelKind::DeepLog | ModelKind::LogAnomaly => {
                let scheme = if kind == ModelKind::DeepLog {
                    VectorScheme::OneHot
                } else {
                    VectorScheme::Count
                };
                (history..classes.len())
                    .map(|j| {
                        self.intern(TrainingUnit::NextEvent {
                            context: context_key(classes, j, scheme, history).to_vec(),
                            target: classes[j],
                        })
                    })
                    .collect()
            }
        }
    }
}

fn one_hot_rows(classes: &[usize], n: usize) -> Vec<Vec<f64>> {
    classes.iter().map(|&c| one_hot(c, n)).collect()
}

fn mismatch() -> Error {
    Error::Precondition("training unit does not fit the model family".into())
}

/// Loss of one unit, accumulating its gradient into `grad` when given.
pub fn unit_loss(
    model: &HybridModel,
    unit: &TrainingUnit,
    history: usize,
    grad: Option<&mut HybridModel>,
) -> Result<f64> {
    match (model, unit) {
        (HybridModel::DeepLog(m), TrainingUnit::NextEvent { context, target }) => {
            let x = one_hot_rows(context, m.n_classes());
            match grad {
                Some(HybridModel::DeepLog(g)) => m.loss_and_grad(&x, *target, g),
                None => m.loss(&x, *target),
                Some(_) => Err(mismatch()),
            }
        }
        (HybridModel::LogAnomaly(m), TrainingUnit::NextEvent { context, target }) => {
            let n = m.sequential.n_classes();
            let tail = &context[context.len().saturating_sub(history)..];
            let seq = one_hot_rows(tail, n);
            let counts = count_vectors(context, n, history);
            let quant = &counts[counts.len().saturating_sub(history)..];
            match grad {
                Some(HybridModel::LogAnomaly(g)) => {
                    Ok(m.sequential
                        .loss_and_grad(&seq, *target, &mut g.sequential)?
                        + m.quantitative
                            .loss_and_grad(quant, *target, &mut g.quantitative)?)
                }
                None => {
                    Ok(m.sequential.loss(&seq, *target)? + m.quantitative.loss(quant, *target)?)
                }
                Some(_) => Err(mismatch()),
            }
        }
        (HybridModel::LogRobust(m), TrainingUnit::Window { classes, anomaly }) => match grad {
            Some(HybridModel::LogRobust(g)) => m.loss_and_grad(classes, *anomaly, g),
            None => m.loss(classes, *anomaly),
            Some(_) => Err(mismatch()),
        },
        _ => Err(mismatch()),
    }
}

/// Multiplicity-weighted mean loss and gradient over `(unit id, count)`
/// pairs. Units run in parallel; the reduction is sequential in input order,
/// so the result does not depend on the thread count.
pub fn batch_gradient(
    model: &HybridModel,
    table: &UnitTable,
    counts: &[(usize, usize)],
    history: usize,
) -> Result<(f64, HybridModel)> {
    let parts = counts
        .par_iter()
        .map(|&(id, _)| {
            let mut g = model.zeros_like();
            let loss = unit_loss(model, table.get(id), history, Some(&mut g))?;
            Ok((loss, g))
        })
        .collect::<Result<Vec<_>>>()?;
    let total: usize = counts.iter().map(|c| c.1).sum();
    let mut grad = model.zeros_like();
    let mut loss = 0.0;
    for ((l, g), &(_, c)) in parts.iter().zip(counts) {
        let w = c as f64 / total as f64;
        loss += w * l;
        grad.accumulate(g, w);
    }
    Ok((loss, grad))
}

/// Multiplicity-weighted mean loss without gradients.
pub fn mean_loss(
    model: &HybridModel,
    table: &UnitTable,
    counts: &[(usize, usize)],
    history: usize,
) -> Result<f64> {
    let losses = counts
        .par_iter()
        .map(|&(id, _)| unit_loss(model, table.get(id), history, None))
        .collect::<Result<Vec<_>>>()?;
    let total: usize = counts.iter().map(|c| c.1).sum();
    Ok(losses
        .iter()
        .zip(counts)
        .map(|(l, &(_, c))| l * c as f64 / total as f64)
        .sum())
}

fn tally<I: IntoIterator<Item = usize>>(ids: I) -> Vec<(usize, usize)> {
    let mut counts = BTreeMap::new();
    for id in ids {
        *counts.entry(id).or_insert(0usize) += 1;
    }
    counts.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub lr: f64,
    pub epochs: usize,
    /// Training units per optimizer step: next-event samples for the
    /// sequence models, windows for the classifier.
    pub batch_size: usize,
    pub clip_norm: f64,
    pub seed: u64,
}

/// Per-epoch mean losses. `val` is `None` when there is no validation data.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossCurve {
    pub train: Vec<f64>,
    pub val: Vec<Option<f64>>,
}

/// Mini-batch Adam with global-norm clipping. The training loss of an epoch
/// is the mean of the batch losses seen during that epoch, weighted by batch
/// size; validation loss is measured after the epoch.
pub fn train_model(
    model: &mut HybridModel,
    kind: ModelKind,
    history: usize,
    train: &[LabeledWindow],
    val: &[LabeledWindow],
    settings: &TrainSettings,
) -> Result<LossCurve> {
    let mut table = UnitTable::default();
    let mut occurrences: Vec<usize> = train
        .iter()
        .flat_map(|w| table.add_window(kind, w, history))
        .collect();
    let val_ids: Vec<usize> = val
        .iter()
        .flat_map(|w| table.add_window(kind, w, history))
        .collect();
    let val_counts = tally(val_ids);
    let mut curve = LossCurve::default();
    if settings.epochs == 0 {
        return Ok(curve);
    }
    if occurrences.is_empty() {
        return Err(Error::Data("no training examples after windowing".into()));
    }
    log::debug!(
        "{} training examples, {} distinct",
        occurrences.len(),
        table.len()
    );

    let mut params = model.flatten();
    let mut adam = AdamState::new(params.len());
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    rng.set_stream(3);
    for epoch in 1..=settings.epochs {
        occurrences.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut weight = 0usize;
        for chunk in occurrences.chunks(settings.batch_size) {
            let counts = tally(chunk.iter().copied());
            let (loss, grad) = batch_gradient(model, &table, &counts, history)?;
            if !loss.is_finite() {
                return Err(Error::Data(format!(
                    "non-finite training loss in epoch {epoch}"
                )));
            }
            let n: usize = counts.iter().map(|c| c.1).sum();
            loss_sum += loss * n as f64;
            weight += n;
            let mut g = grad.flatten();
            clip_global_norm(&mut g, settings.clip_norm);
            adam_step(&mut params, &g, &mut adam, settings.lr)?;
            model.assign_flat(&params)?;
        }
        let train_loss = loss_sum / weight as f64;
        let val_loss = if val_counts.is_empty() {
            None
        } else {
            Some(mean_loss(model, &table, &val_counts, history)?)
        };
        log::info!(
            "epoch {epoch}: train loss {train_loss:.6}, validation loss {}",
            val_loss.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"))
        );
        curve.train.push(train_loss);
        curve.val.push(val_loss);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ModelSpec, Variant};

    fn cyclic(n: usize, len: usize, phase: usize) -> Vec<usize> {
        (0..len).map(|i| (i + phase) % n).collect()
    }

    #[test]
    fn repeated_contexts_share_units() {
        let mut t = UnitTable::default();
        let w = (cyclic(3, 12, 0), false);
        let ids = t.add_window(ModelKind::DeepLog, &w, 2);
        assert_eq!(ids.len(), 10);
        assert_eq!(t.len(), 3);
        let ids = t.add_window(ModelKind::LogRobust, &w, 2);
        assert_eq!(ids.len(), 1);
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn dedup_matches_per_example_mean() {
        let spec = ModelSpec {
            hidden: 2,
            history: 2,
            ..ModelSpec::new(ModelKind::LogAnomaly, Variant::Classical, 4)
        };
        let model = spec.build(&mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let windows = [
            (cyclic(3, 9, 0), false),
            (vec![0, 1, 3, 0, 1, 2, 2, 0, 1], false),
        ];
        let mut table = UnitTable::default();
        let ids: Vec<usize> = windows
            .iter()
            .flat_map(|w| table.add_window(spec.kind, w, 2))
            .collect();
        let counts = tally(ids);
        let (loss, grad) = batch_gradient(&model, &table, &counts, 2).unwrap();

        // oracle: plain mean over every position, recomputed from raw windows
        let HybridModel::LogAnomaly(m) = &model else {
            unreachable!()
        };
        let mut g_ref = m.zeros_like();
        let mut total = 0.0;
        let mut n = 0;
        for (classes, _) in &windows {
            let oh = one_hot_rows(classes, 4);
            let cv = count_vectors(classes, 4, 2);
            for j in 2..classes.len() {
                total += m
                    .sequential
                    .loss_and_grad(&oh[j - 2..j], classes[j], &mut g_ref.sequential)
                    .unwrap();
                total += m
                    .quantitative
                    .loss_and_grad(&cv[j - 2..j], classes[j], &mut g_ref.quantitative)
                    .unwrap();
                n += 1;
            }
        }
        assert!((loss - total / n as f64).abs() < 1e-12);
        let ours = grad.flatten();
        for (a, b) in ours.iter().zip(g_ref.flatten()) {
            assert!((a - b / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn training_lowers_loss_and_is_deterministic() {
        let spec = ModelSpec {
            hidden: 4,
            history: 3,
            ..ModelSpec::new(ModelKind::DeepLog, Variant::Classical, 5)
        };
        let train: Vec<LabeledWindow> = (0..8).map(|p| (cyclic(4, 20, p), false)).collect();
        let settings = TrainSettings {
            lr: 1e-2,
            epochs: 15,
            batch_size: 16,
            clip_norm: 5.0,
            seed: 9,
        };
        let run = || {
            let mut m = spec.build(&mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            let curve = train_model(&mut m, spec.kind, 3, &train, &train[6..], &settings).unwrap();
            (m, curve)
        };
        let (m1, c1) = run();
        let (m2, c2) = run();
        assert_eq!(m1, m2);
        assert_eq!(c1, c2);
        assert_eq!(c1.train.len(), 15);
        assert!(c1.train[14] < c1.train[0]);
        assert!(c1.val.iter().all(|v| v.is_some()));
    }

    #[test]
    fn zero_epochs_leave_model_untouched() {
        let spec = ModelSpec::new(ModelKind::DeepLog, Variant::Quantum, 3);
        let mut m = spec.build(&mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let before = m.clone();
        let settings = TrainSettings {
            lr: 1e-4,
            epochs: 0,
            batch_size: 1,
            clip_norm: 5.0,
            seed: 0,
        };
        let curve = train_model(
            &mut m,
            spec.kind,
            10,
            &[(cyclic(2, 30, 0), false)],
            &[],
            &settings,
        )
        .unwrap();
        assert!(curve.train.is_empty());
        assert_eq!(m, before);
    }
}
