//! Reading raw logs and reading/writing the parsed intermediates.
//!
//! Raw logs are LogHub-style: one record per line, whitespace-delimited, with
//! the alert label in the first field (`-` for normal) and the epoch
//! timestamp in the second. The free-text content starts at a fixed field
//! index that depends on the system that wrote the log.
//!
//! Parsed CSV is `origin_index,label,event_id` with a header row; `label` is
//! `0` for normal and `1` for alert (`-` is also accepted as normal when
//! reading). The templates file is `template_id<TAB>pattern`.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::drain::{drain_parse, DrainConfig, LogTemplate};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    /// BGL: label, epoch, date, node, time, node, type, component, level, content.
    Bgl,
    /// Thunderbird / Spirit: label, epoch, date, host, month, day, time, location, content.
    Thunderbird,
    /// Content begins at the given 0-based field.
    Fields(usize),
}

impl LogFormat {
    pub fn content_field(self) -> usize {
        match self {
            LogFormat::Bgl => 9,
            LogFormat::Thunderbird => 8,
            LogFormat::Fields(n) => n,
        }
    }
}

impl fmt::Display for LogFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogFormat::Bgl => f.write_str("bgl"),
            LogFormat::Thunderbird => f.write_str("thunderbird"),
            LogFormat::Fields(n) => write!(f, "fields:{n}"),
        }
    }
}

impl FromStr for LogFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bgl" => Ok(LogFormat::Bgl),
            "thunderbird" | "spirit" => Ok(LogFormat::Thunderbird),
            other => other
                .strip_prefix("fields:")
                .and_then(|n| n.parse().ok())
                .map(LogFormat::Fields)
                .ok_or_else(|| Error::Config(format!("unknown log format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLogLine {
    pub label: String,
    pub timestamp: Option<i64>,
    pub content: String,
    /// 0-based line number in the source.
    pub line_no: usize,
}

impl RawLogLine {
    pub fn parse(line: &str, line_no: usize, format: LogFormat) -> Result<Self> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let label = fields.first().ok_or_else(|| Error::Parse {
            line: line_no + 1,
            msg: "empty line".into(),
        })?;
        let timestamp = fields.get(1).and_then(|t| t.parse::<i64>().ok());
        let start = format.content_field().min(fields.len());
        Ok(RawLogLine {
            label: label.to_string(),
            timestamp,
            content: fields[start..].join(" "),
            line_no,
        })
    }

    pub fn is_alert(&self) -> bool {
        self.label != "-"
    }
}

/// Reads a raw log, skipping blank lines. Lines are then ordered by
/// timestamp (stable), or left in file order when any timestamp fails to
/// parse.
pub fn read_raw_log(path: impl AsRef<Path>, format: LogFormat) -> Result<Vec<RawLogLine>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        lines.push(RawLogLine::parse(&line, i, format)?);
    }
    order_lines(&mut lines);
    Ok(lines)
}

pub fn parse_raw_text(text: &str, format: LogFormat) -> Result<Vec<RawLogLine>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| RawLogLine::parse(l, i, format))
        .collect::<Result<Vec<_>>>()?;
    order_lines(&mut lines);
    Ok(lines)
}

fn order_lines(lines: &mut [RawLogLine]) {
    if lines.iter().all(|l| l.timestamp.is_some()) {
        lines.sort_by_key(|l| l.timestamp);
    } else {
        lines.sort_by_key(|l| l.line_no);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParsedRecord {
    pub origin: usize,
    pub alert: bool,
    pub event: usize,
}

#[derive(Debug, Clone)]
pub struct ParsedLog {
    pub templates: Vec<LogTemplate>,
    pub records: Vec<ParsedRecord>,
}

impl ParsedLog {
    pub fn events(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.event).collect()
    }

    pub fn alerts(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.alert).collect()
    }
}

pub fn parse_lines(lines: &[RawLogLine], config: DrainConfig) -> Result<ParsedLog> {
    let (templates, ids) = drain_parse(lines.iter().map(|l| l.content.as_str()), config)?;
    let records = lines
        .iter()
        .zip(ids)
        .enumerate()
        .map(|(origin, (l, event))| ParsedRecord {
            origin,
            alert: l.is_alert(),
            event,
        })
        .collect();
    Ok(ParsedLog { templates, records })
}

pub const CSV_HEADER: &str = "origin_index,label,event_id";

pub fn write_parsed_csv<W: Write>(mut w: W, records: &[ParsedRecord]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{},{},{}", r.origin, u8::from(r.alert), r.event)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_parsed_csv<R: BufRead>(r: R) -> Result<Vec<ParsedRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("origin_index")) {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(bad("expected 3 columns"));
        }
        let origin = cols[0].parse().map_err(|_| bad("bad origin_index"))?;
        let alert = !matches!(cols[1], "0" | "-");
        let event = cols[2].parse().map_err(|_| bad("bad event_id"))?;
        out.push(ParsedRecord {
            origin,
            alert,
            event,
        });
    }
    out.sort_by_key(|r| r.origin);
    Ok(out)
}

pub fn write_templates<W: Write>(mut w: W, templates: &[LogTemplate]) -> Result<()> {
    for t in templates {
        writeln!(w, "{}\t{}", t.id, t.pattern())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_templates<R: BufRead>(r: R) -> Result<Vec<LogTemplate>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (id, pattern) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: "expected template_id<TAB>pattern".into(),
        })?;
        let id = id.trim().parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: "bad template id".into(),
        })?;
        out.push(LogTemplate {
            id,
            tokens: pattern.split_whitespace().map(String::from).collect(),
        });
    }
    Ok(out)
}

/// Writes `<stem>.csv`-style output: the records to `csv_path` and the
/// templates next to it as `<csv_path>.templates`.
pub fn write_parsed(csv_path: impl AsRef<Path>, parsed: &ParsedLog) -> Result<()> {
    let csv_path = csv_path.as_ref();
    write_parsed_csv(BufWriter::new(File::create(csv_path)?), &parsed.records)?;
    let tpath = templates_path(csv_path);
    write_templates(BufWriter::new(File::create(tpath)?), &parsed.templates)?;
    Ok(())
}

pub fn templates_path(csv_path: &Path) -> std::path::PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".templates");
    s.into()
}

/// Loads a dataset from either a raw log or a parsed CSV (by `.csv`
/// extension). Templates are only available for raw input or when the
/// sidecar templates file exists.
pub fn load_dataset(
    path: impl AsRef<Path>,
    format: LogFormat,
    drain: DrainConfig,
) -> Result<ParsedLog> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::Data(format!("dataset {} not found", path.display())));
    }
    if path.extension().is_some_and(|e| e == "csv") {
        let records = read_parsed_csv(BufReader::new(File::open(path)?))?;
        let tpath = templates_path(path);
        let templates = if tpath.exists() {
            read_templates(BufReader::new(File::open(tpath)?))?
        } else {
            Vec::new()
        };
        Ok(ParsedLog { templates, records })
    } else {
        let lines = read_raw_log(path, format)?;
        parse_lines(&lines, drain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BGL: &str = "- 1117838570 2005.06.03 R02-M1-N0-C:J12-U11 2005-06-03-15.42.50.675872 R02-M1-N0-C:J12-U11 RAS KERNEL INFO instruction cache parity error corrected";
    const BGL_ALERT: &str = "KERNDTLB 1118536327 2005.06.11 R30-M0-N9-C:J16-U01 2005-06-11-17.32.07.581048 R30-M0-N9-C:J16-U01 RAS KERNEL FATAL data TLB error interrupt";

    #[test]
    fn parses_bgl_lines() {
        let l = RawLogLine::parse(BGL, 0, LogFormat::Bgl).unwrap();
        assert_eq!(l.label, "-");
        assert!(!l.is_alert());
        assert_eq!(l.timestamp, Some(1117838570));
        assert_eq!(l.content, "instruction cache parity error corrected");
        let a = RawLogLine::parse(BGL_ALERT, 1, LogFormat::Bgl).unwrap();
        assert!(a.is_alert());
        assert_eq!(a.content, "data TLB error interrupt");
    }

    #[test]
    fn short_lines_have_empty_content() {
        let l = RawLogLine::parse("- 12 x", 0, LogFormat::Bgl).unwrap();
        assert_eq!(l.content, "");
        assert!(RawLogLine::parse("   ", 0, LogFormat::Bgl).is_err());
    }

    #[test]
    fn timestamp_fallback_keeps_file_order() {
        let text = "- 20 a b c d e f g x\n- notanumber a b c d e f g y\n- 10 a b c d e f g z\n";
        let lines = parse_raw_text(text, LogFormat::Bgl).unwrap();
        let contents: Vec<_> = lines.iter().map(|l| l.content.as_str()).collect();
        assert_eq!(contents, vec!["x", "y", "z"]);
        let sorted = parse_raw_text(
            "- 20 a b c d e f g x\n- 10 a b c d e f g z\n",
            LogFormat::Bgl,
        )
        .unwrap();
        assert_eq!(sorted[0].content, "z");
    }

    #[test]
    fn csv_and_templates_round_trip() {
        let lines =
            parse_raw_text(&format!("{BGL}\n{BGL_ALERT}\n{BGL}\n"), LogFormat::Bgl).unwrap();
        let parsed = parse_lines(&lines, DrainConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_parsed_csv(&mut buf, &parsed.records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        // sorted by timestamp, so the alert moves last
        assert_eq!(text, "origin_index,label,event_id\n0,0,1\n1,0,1\n2,1,2\n");
        assert_eq!(read_parsed_csv(buf.as_slice()).unwrap(), parsed.records);

        let mut tbuf = Vec::new();
        write_templates(&mut tbuf, &parsed.templates).unwrap();
        assert_eq!(
            read_templates(tbuf.as_slice()).unwrap()[1..],
            parsed.templates[1..]
        );
    }

    #[test]
    fn csv_accepts_dash_labels_and_rejects_garbage() {
        let r = read_parsed_csv("0,-,3\n1,FATAL,4\n".as_bytes()).unwrap();
        assert!(!r[0].alert && r[1].alert);
        assert!(read_parsed_csv("0,1\n".as_bytes()).is_err());
        assert!(read_parsed_csv("x,1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn format_names() {
        assert_eq!("bgl".parse::<LogFormat>().unwrap(), LogFormat::Bgl);
        assert_eq!(
            "fields:3".parse::<LogFormat>().unwrap(),
            LogFormat::Fields(3)
        );
        assert!("nope".parse::<LogFormat>().is_err());
    }
}
