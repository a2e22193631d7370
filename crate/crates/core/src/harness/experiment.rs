use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{DatasetSource, ExperimentConfig};
use super::metrics::{compute_metrics, ConfusionCounts, Metrics};
use super::train::{train_model, LabeledWindow, LossCurve, TrainSettings};
use crate::error::{Error, Result};
use crate::kv::KvMap;
use crate::logpipe::{
    chronological_split, filter_normal, generate_bgl, load_dataset, oversample_anomalies,
    parse_lines, parse_raw_text, subsample_training, windowize, LogFormat, ParsedLog, VectorScheme,
    Vocabulary, WindowedSample,
};
use crate::models::{
    count_parameters, HybridModel, LogAnomalyDetector, ModelSpec, ParamReport, TopGDetector,
    MODEL_KEYS,
};
use crate::nn::checkpoint;

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "QLOGAD_THREADS";

/// Pool sized by `QLOGAD_THREADS`, or rayon's default when unset.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("{THREADS_ENV}='{v}' is not a thread count")))?,
        Err(_) => 0,
    };
    sized_thread_pool(n)
}

/// Pool with exactly `n` workers; 0 picks rayon's default.
pub fn sized_thread_pool(n: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Parsed events for the configured dataset.
pub fn load_events(cfg: &ExperimentConfig) -> Result<ParsedLog> {
    match &cfg.dataset {
        DatasetSource::Synthetic(s) => {
            let log = generate_bgl(s)?;
            parse_lines(&parse_raw_text(&log.to_text(), LogFormat::Bgl)?, cfg.drain)
        }
        DatasetSource::File { path, format } => load_dataset(path, *format, cfg.drain),
    }
}

/// Windows split, filtered and mapped to vocabulary classes.
#[derive(Debug, Clone)]
pub struct PreparedData {
    /// Built from every template in the training split.
    pub vocab: Vocabulary,
    pub train: Vec<LabeledWindow>,
    pub val: Vec<LabeledWindow>,
    pub test: Vec<LabeledWindow>,
}

/// Chronological split, then the training side is reduced: semi-supervised
/// models keep normal windows only and are subsampled afterwards; supervised
/// models are subsampled as-is. The tail of what remains is held out for
/// validation, and supervised training windows are oversampled last.
pub fn prepare_data(cfg: &ExperimentConfig, parsed: &ParsedLog) -> Result<PreparedData> {
    let windows = windowize(&parsed.events(), &parsed.alerts(), cfg.window_size)?;
    let (train, test) = chronological_split(&windows, cfg.train_fraction)?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::Data(format!(
            "{} windows are too few for a train/test split",
            windows.len()
        )));
    }
    let vocab = Vocabulary::from_samples(&train);
    let pool = if cfg.model.kind.semi_supervised() {
        subsample_training(&filter_normal(&train)?, cfg.train_ratio, cfg.seed)?
    } else {
        subsample_training(&train, cfg.train_ratio, cfg.seed)?
    };
    let mut n_val = (pool.len() as f64 * cfg.validation_fraction).floor() as usize;
    if n_val == 0 && cfg.validation_fraction > 0.0 && pool.len() >= 2 {
        n_val = 1;
    }
    let (fit, val) = pool.split_at(pool.len() - n_val);
    let fit = if cfg.model.kind.semi_supervised() {
        fit.to_vec()
    } else {
        oversample_anomalies(fit, cfg.oversample_ratio, cfg.seed.wrapping_add(1))?
    };
    let map = |ws: &[WindowedSample]| -> Vec<LabeledWindow> {
        ws.iter()
            .map(|w| (vocab.map_events(&w.events), w.anomaly))
            .collect()
    };
    Ok(PreparedData {
        train: map(&fit),
        val: map(val),
        test: map(&test),
        vocab,
    })
}

/// A trained model with everything needed to score new windows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub vocab: Vocabulary,
    pub model: HybridModel,
    pub window_size: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
    /// Windows too short to judge.
    pub skipped: usize,
}

/// Window verdicts against labels. Next-event models cache scores per
/// context; the classifier caches probabilities per distinct window.
pub fn evaluate(
    model: &HybridModel,
    spec: &ModelSpec,
    threshold: f64,
    windows: &[LabeledWindow],
) -> Result<Evaluation> {
    let mut counts = ConfusionCounts::default();
    let mut skipped = 0;
    let (n, h, g) = (spec.n_classes, spec.history, spec.top_g);
    let mut tally = |verdict: Option<bool>, actual: bool| match verdict {
        Some(v) => counts.record(v, actual),
        None => skipped += 1,
    };
    match model {
        HybridModel::DeepLog(m) => {
            let mut det = TopGDetector::new(m, VectorScheme::OneHot, n, h, g);
            for (classes, actual) in windows {
                tally(det.check(classes)?.map(|v| v.is_anomaly()), *actual);
            }
        }
        HybridModel::LogAnomaly(m) => {
            let mut det = LogAnomalyDetector::new(&m.sequential, &m.quantitative, n, h, g);
            for (classes, actual) in windows {
                tally(det.check(classes)?.map(|v| v.is_anomaly()), *actual);
            }
        }
        HybridModel::LogRobust(m) => {
            let mut distinct: Vec<&Vec<usize>> = windows.iter().map(|w| &w.0).collect();
            distinct.sort();
            distinct.dedup();
            let probs = distinct
                .par_iter()
                .map(|c| m.classify(c))
                .collect::<Result<Vec<_>>>()?;
            let lookup: HashMap<&Vec<usize>, f64> = distinct.into_iter().zip(probs).collect();
            for (classes, actual) in windows {
                tally(Some(lookup[classes] > threshold), *actual);
            }
        }
    }
    Ok(Evaluation {
        counts,
        metrics: compute_metrics(&counts),
        skipped,
    })
}

/// Everything one experiment produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// The configuration as run, with `n_classes` filled in.
    pub config: ExperimentConfig,
    pub dataset: String,
    pub train_windows: usize,
    pub test_windows: usize,
    pub evaluation: Evaluation,
    pub params: ParamReport,
    pub losses: LossCurve,
    /// Excluded from report files, which must be reproducible.
    pub wall_time: Duration,
}

impl ExperimentResult {
    pub fn metrics(&self) -> Metrics {
        self.evaluation.metrics
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub result: ExperimentResult,
    pub trained: TrainedModel,
}

/// Load, prepare, train and evaluate on the `QLOGAD_THREADS` pool. Fully
/// determined by the config; the thread count only changes speed.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    execute_in(cfg, &thread_pool()?)
}

pub fn execute_in(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<ExperimentRun> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    cfg.sync_dataset();
    let start = Instant::now();
    pool.install(|| {
        let parsed = load_events(&cfg)?;
        let data = prepare_data(&cfg, &parsed)?;
        cfg.model.n_classes = data.vocab.n_classes();
        let spec = cfg.model.clone();
        let mut model = spec.build(&mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
        log::info!(
            "{}: {} classes, {} train / {} validation / {} test windows",
            cfg.name,
            spec.n_classes,
            data.train.len(),
            data.val.len(),
            data.test.len()
        );
        let settings = TrainSettings {
            lr: cfg.lr,
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            clip_norm: cfg.clip_norm,
            seed: cfg.seed,
        };
        let losses = train_model(
            &mut model,
            spec.kind,
            spec.history,
            &data.train,
            &data.val,
            &settings,
        )?;
        let evaluation = evaluate(&model, &spec, cfg.threshold, &data.test)?;
        log::info!("{}: {}", cfg.name, evaluation.metrics);
        let result = ExperimentResult {
            dataset: cfg.dataset.label(),
            train_windows: data.train.len(),
            test_windows: data.test.len(),
            evaluation,
            params: count_parameters(&model),
            losses,
            wall_time: start.elapsed(),
            config: cfg.clone(),
        };
        Ok(ExperimentRun {
            result,
            trained: TrainedModel {
                spec,
                vocab: data.vocab,
                model,
                window_size: cfg.window_size,
                threshold: cfg.threshold,
            },
        })
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    execute(cfg).map(|r| r.result)
}

/// Runs the cells one after another, in order.
pub fn run_sweep(cfgs: &[ExperimentConfig]) -> Result<Vec<ExperimentResult>> {
    cfgs.iter()
        .enumerate()
        .map(|(i, c)| {
            log::info!("[{}/{}] {}", i + 1, cfgs.len(), c.name);
            run_experiment(c)
        })
        .collect()
}

/// Sidecar holding the spec and vocabulary next to a checkpoint.
pub fn checkpoint_config_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".config");
    s.into()
}

impl TrainedModel {
    /// Writes the tensors to `path` and the spec to `<path>.config`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        checkpoint::save(path, &self.model)?;
        let mut text = String::new();
        self.spec.write_kv(&mut text);
        let ids: Vec<String> = self
            .vocab
            .template_ids()
            .iter()
            .map(|t| t.to_string())
            .collect();
        let _ = write!(
            text,
            "window_size = {}\nthreshold = {}\nvocabulary = {}\n",
            self.window_size,
            self.threshold,
            ids.join(" ")
        );
        fs::write(checkpoint_config_path(path), text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let side = checkpoint_config_path(path);
        let text = fs::read_to_string(&side)
            .map_err(|e| Error::Data(format!("cannot read {}: {e}", side.display())))?;
        let kv = KvMap::parse(&text)?;
        let known: Vec<&str> = MODEL_KEYS
            .iter()
            .copied()
            .chain(["window_size", "threshold", "vocabulary"])
            .collect();
        kv.reject_unknown(&known)?;
        let spec = ModelSpec::from_kv(&kv)?;
        let vocab = Vocabulary::from_template_ids(
            kv.get_str("vocabulary")
                .unwrap_or("")
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::Data(format!("bad template id '{t}' in vocabulary")))
                })
                .collect::<Result<Vec<_>>>()?,
        );
        if vocab.n_classes() != spec.n_classes {
            return Err(Error::Data(format!(
                "vocabulary gives {} classes but the spec says {}",
                vocab.n_classes(),
                spec.n_classes
            )));
        }
        let mut model = spec.build(&mut ChaCha8Rng::seed_from_u64(0))?;
        checkpoint::load_into(path, &mut model)?;
        Ok(TrainedModel {
            window_size: kv.require("window_size")?,
            threshold: kv.require("threshold")?,
            spec,
            vocab,
            model,
        })
    }

    /// Scores every full window of a parsed log against its labels.
    pub fn evaluate_log(&self, parsed: &ParsedLog) -> Result<Evaluation> {
        let windows = windowize(&parsed.events(), &parsed.alerts(), self.window_size)?;
        let mapped: Vec<LabeledWindow> = windows
            .iter()
            .map(|w| (self.vocab.map_events(&w.events), w.anomaly))
            .collect();
        evaluate(&self.model, &self.spec, self.threshold, &mapped)
    }

    pub fn params(&self) -> ParamReport {
        count_parameters(&self.model)
    }
}
