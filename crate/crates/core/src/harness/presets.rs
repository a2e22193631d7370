//! Built-in experiment grids, one per research question.
//!
//! All cells use the synthetic BGL-style corpus, a 4-qubit circuit with one
//! layer, `R_x` encoding and the `R_x` layout unless the grid varies it.
//! `rq1` runs at full desk scale: 5,000 windows, 30 epochs, lr `1e-4`. The
//! sweeps use a smaller corpus, fewer and larger steps and a higher learning
//! rate so a whole grid trains in minutes on one core.

use super::config::{DatasetSource, ExperimentConfig, QUBIT_COUNTS, TRAIN_RATIOS};
use crate::encode::EncodingScheme;
use crate::error::{Error, Result};
use crate::logpipe::SyntheticConfig;
use crate::models::{ModelKind, Variant};
use crate::pqc::Layout;

pub const PRESETS: [&str; 6] = ["rq1", "rq2", "rq3", "rq4", "rq5", "rq6"];

/// Windows in the full desk-scale corpus.
pub const RQ1_WINDOWS: usize = 5000;
/// Windows in the sweep corpus.
pub const SWEEP_WINDOWS: usize = 250;
/// Epochs per sweep cell.
pub const SWEEP_EPOCHS: usize = 10;
/// Learning rate of the sweep cells. At `1e-4` the ~140 steps of a sweep
/// cell leave every model at its initial, all-anomalous prediction.
pub const SWEEP_LR: f64 = 5e-2;
/// Learning rate of the loss-curve cells.
pub const CURVE_LR: f64 = 1e-2;
/// Next-event samples per step in sweep cells. Simulation cost scales with
/// the number of steps, and an 8-qubit step is roughly fifty times a
/// 4-qubit one.
pub const SWEEP_BATCH: usize = 1024;
/// Windows in the loss-curve corpus.
pub const CURVE_WINDOWS: usize = 200;
/// Window size of the loss-curve corpus. Short windows keep a hundred epochs
/// of the attention models affordable.
pub const CURVE_WINDOW_SIZE: usize = 20;

/// Cutoff used by the next-event detectors on the synthetic corpus. Its
/// normal grammar has a single successor per event, so anything other than
/// the best candidate is a deviation.
pub const SYNTHETIC_TOP_G: usize = 1;

fn base(kind: ModelKind, variant: Variant, windows: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind, variant);
    c.dataset = DatasetSource::Synthetic(SyntheticConfig {
        windows,
        ..SyntheticConfig::default()
    });
    c.model.top_g = SYNTHETIC_TOP_G;
    c.epochs = 30;
    // next-event samples per step for the sequence models, windows otherwise
    c.batch_size = if kind.semi_supervised() { 256 } else { 8 };
    c.sync_dataset();
    c
}

const ALL_MODELS: [(ModelKind, Variant); 6] = [
    (ModelKind::DeepLog, Variant::Quantum),
    (ModelKind::LogAnomaly, Variant::Quantum),
    (ModelKind::LogRobust, Variant::Quantum),
    (ModelKind::DeepLog, Variant::Classical),
    (ModelKind::LogAnomaly, Variant::Classical),
    (ModelKind::LogRobust, Variant::Classical),
];

const QUANTUM_NEXT_EVENT: [ModelKind; 2] = [ModelKind::DeepLog, ModelKind::LogAnomaly];

/// Full-scale model comparison cell.
pub fn rq1_cell(kind: ModelKind, variant: Variant) -> ExperimentConfig {
    let mut c = base(kind, variant, RQ1_WINDOWS);
    c.name = format!("rq1-{}", c.model.display_name());
    c
}

fn sweep_cell(kind: ModelKind, variant: Variant, tag: &str) -> ExperimentConfig {
    let mut c = base(kind, variant, SWEEP_WINDOWS);
    c.name = format!("{}-{tag}", c.model.display_name());
    c.epochs = SWEEP_EPOCHS;
    c.lr = SWEEP_LR;
    if kind.semi_supervised() {
        c.batch_size = SWEEP_BATCH;
    }
    c
}

fn set_qubits(c: &mut ExperimentConfig, n: usize) {
    c.model.circuit.n_qubits = n;
    c.model.hidden = n;
}

/// Expands a preset name into its grid.
pub fn preset(name: &str) -> Result<Vec<ExperimentConfig>> {
    let cells = match name {
        "rq1" => ALL_MODELS.iter().map(|&(k, v)| rq1_cell(k, v)).collect(),
        "rq2" => QUANTUM_NEXT_EVENT
            .iter()
            .flat_map(|&k| {
                QUBIT_COUNTS.iter().map(move |&n| {
                    let mut c = sweep_cell(k, Variant::Quantum, &format!("rq2-{n}q"));
                    set_qubits(&mut c, n);
                    c
                })
            })
            .collect(),
        "rq3" => QUANTUM_NEXT_EVENT
            .iter()
            .flat_map(|&k| {
                EncodingScheme::ALL.iter().map(move |&e| {
                    let mut c = sweep_cell(k, Variant::Quantum, &format!("rq3-{e}"));
                    c.model.circuit.encoding = e;
                    c
                })
            })
            .collect(),
        "rq4" => QUANTUM_NEXT_EVENT
            .iter()
            .flat_map(|&k| {
                Layout::ALL.iter().map(move |&l| {
                    let mut c = sweep_cell(k, Variant::Quantum, &format!("rq4-{l}"));
                    c.model.circuit.layout = l;
                    c
                })
            })
            .collect(),
        "rq5" => QUANTUM_NEXT_EVENT
            .iter()
            .flat_map(|&k| [(k, Variant::Classical), (k, Variant::Quantum)])
            .flat_map(|(k, v)| {
                TRAIN_RATIOS.iter().map(move |&r| {
                    let mut c = sweep_cell(k, v, &format!("rq5-{r}"));
                    c.train_ratio = r;
                    c
                })
            })
            .collect(),
        "rq6" => ALL_MODELS
            .iter()
            .map(|&(k, v)| {
                let mut c = base(k, v, CURVE_WINDOWS);
                c.name = format!("rq6-{}", c.model.display_name());
                c.window_size = CURVE_WINDOW_SIZE;
                c.epochs = 100;
                c.lr = CURVE_LR;
                c.sync_dataset();
                c
            })
            .collect(),
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}'; expected one of {}",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let sizes: Vec<usize> = PRESETS.iter().map(|p| preset(p).unwrap().len()).collect();
        assert_eq!(sizes, [6, 6, 8, 8, 16, 6]);
    }

    #[test]
    fn cells_are_valid_and_uniquely_named() {
        let mut names = std::collections::HashSet::new();
        for p in PRESETS {
            for c in preset(p).unwrap() {
                c.validate().unwrap();
                assert!(names.insert(c.name.clone()), "duplicate {}", c.name);
            }
        }
        assert!(preset("rq7").is_err());
    }

    #[test]
    fn sweeps_vary_one_axis() {
        let rq2 = preset("rq2").unwrap();
        assert_eq!(
            rq2.iter()
                .map(|c| c.model.circuit.n_qubits)
                .collect::<Vec<_>>(),
            [4, 6, 8, 4, 6, 8]
        );
        let rq4 = preset("rq4").unwrap();
        assert!(rq4
            .iter()
            .all(|c| c.model.circuit.encoding == EncodingScheme::AngleRx));
        let rq5 = preset("rq5").unwrap();
        assert!(rq5.iter().all(|c| c.model.circuit.n_qubits == 4));
    }
}
