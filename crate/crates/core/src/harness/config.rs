use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::kv::KvMap;
use crate::logpipe::{DrainConfig, LogFormat, SyntheticConfig, DEFAULT_WINDOW_SIZE};
use crate::models::{ModelKind, ModelSpec, Variant, MODEL_KEYS};

/// Where an experiment's log lines come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    /// Generated BGL-format lines; `window_size` and `history` follow the
    /// experiment.
    Synthetic(SyntheticConfig),
    /// A raw log (parsed with Drain) or a parsed `.csv`.
    File { path: PathBuf, format: LogFormat },
}

impl DatasetSource {
    /// Short label used in tables.
    pub fn label(&self) -> String {
        match self {
            DatasetSource::Synthetic(s) => format!("synthetic-{}", s.windows),
            DatasetSource::File { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }
}

pub const TRAIN_RATIOS: [f64; 4] = [0.01, 0.1, 0.5, 1.0];
pub const QUBIT_COUNTS: [usize; 3] = [4, 6, 8];
pub const MAX_EPOCHS: usize = 100;

const HARNESS_KEYS: &[&str] = &[
    "name",
    "dataset",
    "format",
    "synthetic_windows",
    "synthetic_anomaly_rate",
    "synthetic_foreign_fraction",
    "synthetic_seed",
    "drain_depth",
    "drain_similarity",
    "drain_max_children",
    "window_size",
    "train_fraction",
    "validation_fraction",
    "lr",
    "epochs",
    "batch_size",
    "train_ratio",
    "oversample_ratio",
    "clip_norm",
    "threshold",
    "seed",
];

/// One cell of an experiment grid.
///
/// Text form is the crate's `key = value` grammar. Model keys (`model`,
/// `variant`, `n_qubits`, `encoding`, `layout`, ...) sit alongside the
/// harness keys; `dataset` is either `synthetic` or a file path.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    /// `n_classes` is filled in from the training vocabulary at run time.
    pub model: ModelSpec,
    pub dataset: DatasetSource,
    pub drain: DrainConfig,
    pub window_size: usize,
    pub train_fraction: f64,
    /// Chronological tail of the training windows held out for validation loss.
    pub validation_fraction: f64,
    pub lr: f64,
    pub epochs: usize,
    /// Training units per optimizer step: next-event samples for DeepLog and
    /// LogAnomaly, windows for LogRobust.
    pub batch_size: usize,
    pub train_ratio: f64,
    /// Minimum anomalous-to-normal ratio for supervised training.
    pub oversample_ratio: f64,
    pub clip_norm: f64,
    /// Anomaly-probability cut for supervised models.
    pub threshold: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(kind: ModelKind, variant: Variant) -> Self {
        let model = ModelSpec::new(kind, variant, 0);
        ExperimentConfig {
            name: model.display_name(),
            model,
            dataset: DatasetSource::Synthetic(SyntheticConfig::default()),
            drain: DrainConfig::default(),
            window_size: DEFAULT_WINDOW_SIZE,
            train_fraction: 0.8,
            validation_fraction: 0.1,
            lr: 1e-4,
            epochs: 20,
            batch_size: 16,
            train_ratio: 1.0,
            oversample_ratio: 1.0 / 3.0,
            clip_norm: 5.0,
            threshold: 0.5,
            seed: 1,
        }
    }

    /// Checks ranges and cross-field consistency. Values outside the
    /// enumerated grids are accepted as extensions with a warning.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.epochs > MAX_EPOCHS {
            return bad(format!("epochs {} > {MAX_EPOCHS}", self.epochs));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.lr));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if !(self.train_ratio > 0.0 && self.train_ratio <= 1.0) {
            return bad(format!("train_ratio {} outside (0, 1]", self.train_ratio));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            ));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad(format!(
                "validation_fraction {} outside [0, 1)",
                self.validation_fraction
            ));
        }
        if !(self.clip_norm > 0.0) || !(self.oversample_ratio > 0.0) {
            return bad("clip_norm and oversample_ratio must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold {} outside [0, 1]", self.threshold));
        }
        if self.window_size < 2 {
            return bad(format!("window size {} < 2", self.window_size));
        }
        if self.model.kind.semi_supervised() && self.window_size <= self.model.history {
            return bad(format!(
                "window size {} leaves no prediction targets after a history of {}",
                self.window_size, self.model.history
            ));
        }
        if self.model.top_g == 0 && self.model.kind.semi_supervised() {
            return bad("top_g must be positive".into());
        }
        self.drain.validate()?;
        if let DatasetSource::Synthetic(s) = &self.dataset {
            if s.windows == 0 {
                return bad("synthetic corpus needs at least one window".into());
            }
        }
        if self.model.variant == Variant::Quantum {
            let c = &self.model.circuit;
            c.validate()?;
            if !QUBIT_COUNTS.contains(&c.n_qubits) {
                log::warn!(
                    "n_qubits = {} is outside {{4, 6, 8}} (extension)",
                    c.n_qubits
                );
            }
            if self.model.kind == ModelKind::LogRobust {
                self.model.attention_design().validate()?;
            }
        }
        if !TRAIN_RATIOS
            .iter()
            .any(|r| (r - self.train_ratio).abs() < 1e-12)
        {
            log::warn!(
                "train_ratio = {} is outside {{0.01, 0.1, 0.5, 1.0}} (extension)",
                self.train_ratio
            );
        }
        Ok(())
    }

    pub fn from_kv(kv: &KvMap) -> Result<Self> {
        let known: Vec<&str> = MODEL_KEYS.iter().chain(HARNESS_KEYS).copied().collect();
        kv.reject_unknown(&known)?;
        let model = ModelSpec::from_kv(kv)?;
        let mut c = ExperimentConfig::new(model.kind, model.variant);
        c.name = kv
            .get_str("name")
            .map(str::to_string)
            .unwrap_or_else(|| model.display_name());
        c.model = model;
        c.window_size = kv.get("window_size")?.unwrap_or(c.window_size);
        c.dataset = match kv.get_str("dataset").unwrap_or("synthetic") {
            "synthetic" => {
                let d = SyntheticConfig::default();
                DatasetSource::Synthetic(SyntheticConfig {
                    windows: kv.get("synthetic_windows")?.unwrap_or(d.windows),
                    window_size: c.window_size,
                    anomaly_rate: kv.get("synthetic_anomaly_rate")?.unwrap_or(d.anomaly_rate),
                    foreign_fraction: kv
                        .get("synthetic_foreign_fraction")?
                        .unwrap_or(d.foreign_fraction),
                    history: c.model.history,
                    seed: kv.get("synthetic_seed")?.unwrap_or(d.seed),
                })
            }
            path => DatasetSource::File {
                path: PathBuf::from(path),
                format: kv.get("format")?.unwrap_or(LogFormat::Bgl),
            },
        };
        c.drain = DrainConfig {
            depth: kv.get("drain_depth")?.unwrap_or(c.drain.depth),
            sim_threshold: kv.get("drain_similarity")?.unwrap_or(c.drain.sim_threshold),
            max_children: kv
                .get("drain_max_children")?
                .unwrap_or(c.drain.max_children),
        };
        c.train_fraction = kv.get("train_fraction")?.unwrap_or(c.train_fraction);
        c.validation_fraction = kv
            .get("validation_fraction")?
            .unwrap_or(c.validation_fraction);
        c.lr = kv.get("lr")?.unwrap_or(c.lr);
        c.epochs = kv.get("epochs")?.unwrap_or(c.epochs);
        c.batch_size = kv.get("batch_size")?.unwrap_or(c.batch_size);
        c.train_ratio = kv.get("train_ratio")?.unwrap_or(c.train_ratio);
        c.oversample_ratio = kv.get("oversample_ratio")?.unwrap_or(c.oversample_ratio);
        c.clip_norm = kv.get("clip_norm")?.unwrap_or(c.clip_norm);
        c.threshold = kv.get("threshold")?.unwrap_or(c.threshold);
        c.seed = kv.get("seed")?.unwrap_or(c.seed);
        c.validate()?;
        Ok(c)
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        Self::from_kv(&KvMap::parse(text)?)
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "name = {}", self.name);
        let mut model = String::new();
        self.model.write_kv(&mut model);
        // n_classes is derived from the data, not configured
        for line in model.lines().filter(|l| !l.starts_with("n_classes")) {
            let _ = writeln!(s, "{line}");
        }
        match &self.dataset {
            DatasetSource::Synthetic(d) => {
                let _ = writeln!(
                    s,
                    "dataset = synthetic\nsynthetic_windows = {}\nsynthetic_anomaly_rate = {}\n\
                     synthetic_foreign_fraction = {}\nsynthetic_seed = {}",
                    d.windows, d.anomaly_rate, d.foreign_fraction, d.seed
                );
            }
            DatasetSource::File { path, format } => {
                let _ = writeln!(s, "dataset = {}\nformat = {format}", path.display());
            }
        }
        let _ = write!(
            s,
            "drain_depth = {}\ndrain_similarity = {}\ndrain_max_children = {}\nwindow_size = {}\n\
             train_fraction = {}\nvalidation_fraction = {}\nlr = {}\nepochs = {}\nbatch_size = {}\n\
             train_ratio = {}\noversample_ratio = {}\nclip_norm = {}\nthreshold = {}\nseed = {}\n",
            self.drain.depth,
            self.drain.sim_threshold,
            self.drain.max_children,
            self.window_size,
            self.train_fraction,
            self.validation_fraction,
            self.lr,
            self.epochs,
            self.batch_size,
            self.train_ratio,
            self.oversample_ratio,
            self.clip_norm,
            self.threshold,
            self.seed
        );
        s
    }

    /// Keeps a synthetic dataset's window size and history in step with the
    /// experiment after fields were edited directly.
    pub fn sync_dataset(&mut self) {
        if let DatasetSource::Synthetic(s) = &mut self.dataset {
            s.window_size = self.window_size;
            s.history = self.model.history;
        }
    }
}
