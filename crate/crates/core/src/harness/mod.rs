//! Metrics, experiment configs, training, research-question presets and
//! report files.
//!
//! An experiment is one [`ExperimentConfig`]: data source, model spec and
//! optimizer settings. [`run_experiment`] parses, windows, splits, trains and
//! evaluates it; [`emit_reports`] writes the CSV and text outputs. Anomalous
//! windows are the positive class throughout.

mod config;
mod experiment;
mod metrics;
mod presets;
mod report;
mod train;

pub use config::{DatasetSource, ExperimentConfig, MAX_EPOCHS, QUBIT_COUNTS, TRAIN_RATIOS};
pub use experiment::{
    checkpoint_config_path, evaluate, execute, execute_in, load_events, prepare_data,
    run_experiment, run_sweep, sized_thread_pool, thread_pool, Evaluation, ExperimentResult,
    ExperimentRun, PreparedData, TrainedModel, THREADS_ENV,
};
pub use metrics::{compute_metrics, ConfusionCounts, Metrics};
pub use presets::{
    preset, rq1_cell, CURVE_LR, CURVE_WINDOWS, CURVE_WINDOW_SIZE, PRESETS, RQ1_WINDOWS,
    SWEEP_BATCH, SWEEP_EPOCHS, SWEEP_LR, SWEEP_WINDOWS, SYNTHETIC_TOP_G,
};
pub use report::{
    describe_dataset, emit_reports, file_stem, loss_csv, results_csv, results_row, results_table,
    RESULTS_HEADER,
};
pub use train::{
    batch_gradient, mean_loss, train_model, unit_loss, LabeledWindow, LossCurve, TrainSettings,
    TrainingUnit, UnitTable,
};
