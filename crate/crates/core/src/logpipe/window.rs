use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_WINDOW_SIZE: usize = 100;

/// A fixed-length run of event ids cut from the log stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WindowedSample {
    pub events: Vec<usize>,
    /// True when any line in the window carried an alert label.
    pub anomaly: bool,
    /// Position of the window in the stream, 0-based.
    pub origin: usize,
}

impl WindowedSample {
    pub fn label(&self) -> u8 {
        u8::from(self.anomaly)
    }
}

/// Cuts the stream into consecutive non-overlapping windows. The trailing
/// partial window is dropped.
pub fn windowize(
    events: &[usize],
    alerts: &[bool],
    window_size: usize,
) -> Result<Vec<WindowedSample>> {
    if window_size < 2 {
        return Err(Error::Config(format!("window size {window_size} < 2")));
    }
    if events.len() != alerts.len() {
        return Err(Error::Dimension(format!(
            "{} events but {} labels",
            events.len(),
            alerts.len()
        )));
    }
    if events.len() < window_size {
        log::warn!(
            "only {} lines, fewer than one window of {window_size}",
            events.len()
        );
    }
    Ok(events
        .chunks_exact(window_size)
        .zip(alerts.chunks_exact(window_size))
        .enumerate()
        .map(|(origin, (ev, al))| WindowedSample {
            events: ev.to_vec(),
            anomaly: al.iter().any(|&a| a),
            origin,
        })
        .collect())
}

/// First `⌊N·train_fraction⌋` samples train, the rest test. No shuffling.
pub fn chronological_split(
    samples: &[WindowedSample],
    train_fraction: f64,
) -> Result<(Vec<WindowedSample>, Vec<WindowedSample>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let cut = (samples.len() as f64 * train_fraction).floor() as usize;
    Ok((samples[..cut].to_vec(), samples[cut..].to_vec()))
}

/// Seeded uniform subset of size `⌈N·ratio⌉`, returned in chronological order.
pub fn subsample_training(
    train: &[WindowedSample],
    ratio: f64,
    seed: u64,
) -> Result<Vec<WindowedSample>> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Config(format!(
            "training ratio {ratio} outside (0, 1]"
        )));
    }
    let n = train.len();
    let k = ((n as f64 * ratio) - 1e-9).ceil().max(0.0) as usize;
    let k = k.min(n);
    if k == 0 {
        return Err(Error::Data("training subset is empty".into()));
    }
    if k == n {
        return Ok(train.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, n, k).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| train[i].clone()).collect())
}

/// Drops anomalous windows for semi-supervised training.
pub fn filter_normal(train: &[WindowedSample]) -> Result<Vec<WindowedSample>> {
    let out: Vec<_> = train.iter().filter(|s| !s.anomaly).cloned().collect();
    if out.is_empty() {
        return Err(Error::Data("no normal windows in the training set".into()));
    }
    Ok(out)
}

/// Duplicates anomalous windows until `anomalies ≥ ⌈normals·target_ratio⌉`.
/// Copies cycle through the anomalies starting at a seeded offset and are
/// placed directly after their original.
pub fn oversample_anomalies(
    train: &[WindowedSample],
    target_ratio: f64,
    seed: u64,
) -> Result<Vec<WindowedSample>> {
    if !(target_ratio > 0.0) {
        return Err(Error::Config(format!(
            "oversampling ratio {target_ratio} must be positive"
        )));
    }
    let anomalies: Vec<usize> = (0..train.len()).filter(|&i| train[i].anomaly).collect();
    if anomalies.is_empty() {
        return Err(Error::Data(
            "supervised training needs at least one anomalous window".into(),
        ));
    }
    let normals = train.len() - anomalies.len();
    let need = ((normals as f64 * target_ratio) - 1e-9).ceil().max(0.0) as usize;
    if anomalies.len() >= need {
        return Ok(train.to_vec());
    }
    let mut copies = vec![0usize; train.len()];
    let start = ChaCha8Rng::seed_from_u64(seed).gen_range(0..anomalies.len());
    for k in 0..need - anomalies.len() {
        copies[anomalies[(start + k) % anomalies.len()]] += 1;
    }
    let mut out = Vec::with_capacity(need + normals);
    for (s, &c) in train.iter().zip(&copies) {
        for _ in 0..=c {
            out.push(s.clone());
        }
    }
    Ok(out)
}
