//! Synthetic BGL-format logs with a known grammar.
//!
//! Normal traffic cycles through a fixed list of message templates. Each
//! anomalous window gets one alert line at an offset of at least `history`
//! inside the window, so a next-event detector always has a full history
//! before it. An alert line is either a foreign message that never occurs in
//! normal traffic or a repeat of the preceding normal message.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Normal message patterns; `{}` is replaced by a varying number.
pub const NORMAL_PATTERNS: [&str; 12] = [
    "instruction cache parity error corrected",
    "generating core.{}",
    "ciod: Received signal {} from client",
    "total of {} ddr error(s) detected and corrected",
    "CE sym {} at 0x0b85eee0 mask 0x10",
    "MailboxMonitor::serviceMailboxes() lib_ido_error: -1019 socket closed",
    "program interrupt: fp cr field {}",
    "shutdown complete after {} seconds",
    "idoproxydb hit ASSERT condition: ASSERT expression={}",
    "node map file loaded with {} entries",
    "ciodb has been restarted {} times",
    "job {} timed out waiting for partition",
];

/// Alert-only message patterns.
pub const FOREIGN_PATTERNS: [&str; 5] = [
    "data TLB error interrupt",
    "machine check interrupt bit {}",
    "rts panic! - stopping execution",
    "kernel panic node {} halted",
    "critical input interrupt unit {} bit {}",
];

const ALERT_TAGS: [&str; 4] = ["KERNDTLB", "KERNMC", "KERNRTSP", "APPSEV"];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub windows: usize,
    pub window_size: usize,
    /// Fraction of windows that receive an alert line.
    pub anomaly_rate: f64,
    /// Among alert lines, the fraction that are foreign messages rather than repeats.
    pub foreign_fraction: f64,
    /// Minimum offset of the alert line inside its window.
    pub history: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            windows: 5000,
            window_size: 100,
            anomaly_rate: 0.1,
            foreign_fraction: 0.7,
            history: 10,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlertKind {
    Foreign(usize),
    Repeat,
}

#[derive(Debug, Clone)]
pub struct SyntheticLog {
    pub lines: Vec<String>,
    /// Per window: the alert offset and kind, if any.
    pub alerts: Vec<Option<(usize, AlertKind)>>,
}

impl SyntheticLog {
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.lines.len() * 120);
        for l in &self.lines {
            s.push_str(l);
            s.push('\n');
        }
        s
    }

    pub fn anomalous_windows(&self) -> usize {
        self.alerts.iter().filter(|a| a.is_some()).count()
    }
}

fn fill(pattern: &str, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::with_capacity(pattern.len() + 8);
    let mut parts = pattern.split("{}");
    out.push_str(parts.next().unwrap_or(""));
    for p in parts {
        out.push_str(&rng.gen_range(0..10_000u32).to_string());
        out.push_str(p);
    }
    out
}

fn bgl_line(label: &str, t: i64, content: &str, rng: &mut ChaCha8Rng) -> String {
    let node = format!(
        "R{:02}-M{}-N{}-C:J{:02}-U{:02}",
        rng.gen_range(0..64),
        rng.gen_range(0..2),
        rng.gen_range(0..16),
        rng.gen_range(2..18),
        rng.gen_range(1..12)
    );
    let day = 3 + t.div_euclid(86_400) % 27;
    let secs = t.rem_euclid(86_400);
    let (hh, mm, ss) = (secs / 3600, secs / 60 % 60, secs % 60);
    let level = if label == "-" { "INFO" } else { "FATAL" };
    format!(
        "{label} {t} 2005.06.{day:02} {node} 2005-06-{day:02}-{hh:02}.{mm:02}.{ss:02}.000000 {node} RAS KERNEL {level} {content}"
    )
}

/// Generates `windows × window_size` lines in BGL format.
pub fn generate_bgl(config: &SyntheticConfig) -> Result<SyntheticLog> {
    if config.window_size < 2 || config.history >= config.window_size {
        return Err(Error::Config(format!(
            "need 2 <= window size and history < window size, got {} and {}",
            config.window_size, config.history
        )));
    }
    for (name, v) in [
        ("anomaly_rate", config.anomaly_rate),
        ("foreign_fraction", config.foreign_fraction),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Config(format!("{name} {v} outside [0, 1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut lines = Vec::with_capacity(config.windows * config.window_size);
    let mut alerts = Vec::with_capacity(config.windows);
    let mut phase = 0usize;
    let mut t: i64 = 1_117_838_570;
    let mut prev_pattern = NORMAL_PATTERNS[NORMAL_PATTERNS.len() - 1];

    for _ in 0..config.windows {
        let alert = if rng.gen_bool(config.anomaly_rate) {
            let offset = rng.gen_range(config.history..config.window_size);
            let kind = if rng.gen_bool(config.foreign_fraction) {
                AlertKind::Foreign(rng.gen_range(0..FOREIGN_PATTERNS.len()))
            } else {
                AlertKind::Repeat
            };
            Some((offset, kind))
        } else {
            None
        };
        for pos in 0..config.window_size {
            t += 1;
            match alert {
                Some((offset, kind)) if offset == pos => {
                    let pattern = match kind {
                        AlertKind::Foreign(k) => FOREIGN_PATTERNS[k],
                        AlertKind::Repeat => prev_pattern,
                    };
                    let tag = ALERT_TAGS[rng.gen_range(0..ALERT_TAGS.len())];
                    let content = fill(pattern, &mut rng);
                    lines.push(bgl_line(tag, t, &content, &mut rng));
                }
                _ => {
                    let pattern = NORMAL_PATTERNS[phase];
                    phase = (phase + 1) % NORMAL_PATTERNS.len();
                    prev_pattern = pattern;
                    let content = fill(pattern, &mut rng);
                    lines.push(bgl_line("-", t, &content, &mut rng));
                }
            }
        }
        alerts.push(alert);
    }
    Ok(SyntheticLog { lines, alerts })
}
