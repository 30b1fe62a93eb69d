//! Document ingestion: JSONL parsing, keyword/interval filtering and dedup.

use std::collections::HashSet;
use std::fmt;
use std::io::BufRead;

use chrono::{DateTime, Duration, FixedOffset, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default day-bucketing offset (UTC+9).
pub const DEFAULT_TZ_OFFSET_MINUTES: i32 = 540;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Social,
    News,
}

impl Channel {
    pub const ALL: [Channel; 2] = [Channel::Social, Channel::News];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Social => "social",
            Channel::News => "news",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One timestamped text item. `timestamp` is UTC epoch seconds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub timestamp: i64,
    pub channel: Channel,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    /// OR-matched substrings. An empty list disables keyword filtering.
    #[serde(default)]
    pub keywords: Vec<String>,
    pub interval_start: DateTime<Utc>,
    /// Exclusive.
    pub interval_end: DateTime<Utc>,
    #[serde(default = "default_tz_offset")]
    pub tz_offset_minutes: i32,
    #[serde(default = "default_true")]
    pub dedup: bool,
}

fn default_tz_offset() -> i32 {
    DEFAULT_TZ_OFFSET_MINUTES
}

fn default_true() -> bool {
    true
}

impl CorpusConfig {
    pub fn new(interval_start: DateTime<Utc>, interval_end: DateTime<Utc>) -> Self {
        CorpusConfig {
            keywords: Vec::new(),
            interval_start,
            interval_end,
            tz_offset_minutes: DEFAULT_TZ_OFFSET_MINUTES,
            dedup: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.interval_start >= self.interval_end {
            return Err(Error::Config(format!(
                "interval_start {} must precede interval_end {}",
                self.interval_start, self.interval_end
            )));
        }
        if !(-840..=840).contains(&self.tz_offset_minutes) {
            return Err(Error::Config(format!(
                "tz_offset_minutes {} outside [-840, 840]",
                self.tz_offset_minutes
            )));
        }
        Ok(())
    }

    fn offset(&self) -> FixedOffset {
        FixedOffset::east_opt(self.tz_offset_minutes * 60).expect("offset validated")
    }

    /// Calendar day of an epoch-seconds instant under the configured offset.
    pub fn day_of(&self, timestamp: i64) -> NaiveDate {
        let local = timestamp + i64::from(self.tz_offset_minutes) * 60;
        let days = local.div_euclid(86_400);
        NaiveDate::from_ymd_opt(1970, 1, 1).unwrap() + Duration::days(days)
    }

    pub fn first_day(&self) -> NaiveDate {
        self.interval_start
            .with_timezone(&self.offset())
            .date_naive()
    }

    /// Day of the last instant inside the half-open interval.
    pub fn last_day(&self) -> NaiveDate {
        self.day_of(self.interval_end.timestamp() - 1)
    }

    pub fn n_days(&self) -> usize {
        ((self.last_day() - self.first_day()).num_days() + 1).max(0) as usize
    }

    pub fn contains(&self, timestamp: i64) -> bool {
        timestamp >= self.interval_start.timestamp() && timestamp < self.interval_end.timestamp()
    }

    fn matches_keywords(&self, text: &str) -> bool {
        if self.keywords.is_empty() {
            return true;
        }
        let folded = text.to_ascii_lowercase();
        self.keywords
            .iter()
            .any(|k| folded.contains(&k.to_ascii_lowercase()))
    }
}

/// A per-line problem found while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiagnostic {
    /// 1-based.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedCorpus {
    pub documents: Vec<Document>,
    pub diagnostics: Vec<LineDiagnostic>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTimestamp {
    Epoch(i64),
    Text(String),
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    timestamp: Option<RawTimestamp>,
    channel: Option<Channel>,
    text: Option<String>,
}

fn parse_record(line: &str) -> std::result::Result<Document, String> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let id = raw.id.ok_or("missing field `id`")?;
    if id.is_empty() {
        return Err("empty `id`".into());
    }
    let timestamp = match raw.timestamp.ok_or("missing field `timestamp`")? {
        RawTimestamp::Epoch(s) => s,
        RawTimestamp::Text(s) => DateTime::parse_from_rfc3339(&s)
            .map_err(|e| format!("timestamp {s:?}: {e}"))?
            .timestamp(),
    };
    let channel = raw.channel.ok_or("missing field `channel`")?;
    let text = raw.text.ok_or("missing field `text`")?;
    Ok(Document {
        id,
        timestamp,
        channel,
        text,
    })
}

/// Parses newline-delimited JSON records. Blank lines are skipped; any
/// other line that does not yield a [`Document`] becomes a diagnostic.
/// Only I/O failures abort.
pub fn parse_jsonl<R: BufRead>(reader: R) -> std::io::Result<ParsedCorpus> {
    let mut out = ParsedCorpus::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line) {
            Ok(doc) => out.documents.push(doc),
            Err(message) => out.diagnostics.push(LineDiagnostic {
                line: i + 1,
                message,
            }),
        }
    }
    Ok(out)
}

/// Keeps documents that are non-empty, match a keyword, fall inside the
/// interval and (with `dedup`) carry text not seen earlier in the same
/// channel. Order is preserved.
pub fn filter_corpus(docs: &[Document], cfg: &CorpusConfig) -> Vec<Document> {
    let mut seen: HashSet<(Channel, &str)> = HashSet::new();
    docs.iter()
        .filter(|d| {
            !d.text.is_empty()
                && cfg.contains(d.timestamp)
                && cfg.matches_keywords(&d.text)
                && (!cfg.dedup || seen.insert((d.channel, d.text.as_str())))
        })
        .cloned()
        .collect()
}

/// Rejects a corpus holding the same `(channel, id)` twice.
pub fn check_unique_ids(docs: &[Document]) -> Result<()> {
    let mut seen = HashSet::new();
    for d in docs {
        if !seen.insert((d.channel, d.id.as_str())) {
            return Err(Error::Validation(format!(
                "duplicate document id {:?} in channel {}",
                d.id, d.channel
            )));
        }
    }
    Ok(())
}
