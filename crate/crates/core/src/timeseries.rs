//! Daily aggregation, rolling means and dominance crossovers.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusConfig, Document};
use crate::emotion::{Emotion, EmotionVector, N_EMOTIONS};
use crate::error::{Error, Result};
use crate::scoring::ScoredDocument;

pub const DEFAULT_WINDOW: usize = 7;

/// Eight emotion values for one day, not necessarily on the simplex.
pub type EmotionRow = [f64; N_EMOTIONS];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayRecord {
    pub count: usize,
    /// Absent on days without documents.
    pub mean: Option<EmotionVector>,
}

/// Per-day counts and mean emotion vectors over a contiguous run of days.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    pub start_day: NaiveDate,
    pub days: Vec<DayRecord>,
}

impl DailySeries {
    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn day(&self, index: usize) -> NaiveDate {
        self.start_day + Duration::days(index as i64)
    }

    pub fn counts(&self) -> Vec<f64> {
        self.days.iter().map(|d| d.count as f64).collect()
    }

    /// Daily means with empty days imputed as the uniform vector.
    pub fn emotion_rows(&self) -> Vec<EmotionRow> {
        self.days
            .iter()
            .map(|d| d.mean.unwrap_or_else(EmotionVector::uniform).0)
            .collect()
    }

    pub fn total_count(&self) -> usize {
        self.days.iter().map(|d| d.count).sum()
    }
}

/// Where a window's value is placed in time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    /// Labeled by the window's last day.
    #[default]
    Trailing,
    /// Labeled by the window's middle day (the earlier middle for even windows).
    Centered,
}

impl Alignment {
    fn label_offset(self, window: usize) -> usize {
        match self {
            Alignment::Trailing => window.saturating_sub(1),
            Alignment::Centered => window.saturating_sub(1) / 2,
        }
    }
}

/// Rolling-window means labeled by day.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedSeries<T> {
    pub window: usize,
    pub first_day: NaiveDate,
    pub values: Vec<T>,
    /// Set when the input was shorter than the window.
    pub diagnostic: Option<String>,
}

impl<T> SmoothedSeries<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn day(&self, index: usize) -> NaiveDate {
        self.first_day + Duration::days(index as i64)
    }

    pub fn last_day(&self) -> Option<NaiveDate> {
        self.values.len().checked_sub(1).map(|i| self.day(i))
    }

    /// Index of `day`, if it is covered.
    pub fn index_of(&self, day: NaiveDate) -> Option<usize> {
        let offset = (day - self.first_day).num_days();
        (offset >= 0 && (offset as usize) < self.values.len()).then_some(offset as usize)
    }
}

impl SmoothedSeries<EmotionRow> {
    pub fn column(&self, emotion: Emotion) -> Vec<f64> {
        self.values.iter().map(|row| row[emotion.index()]).collect()
    }
}

/// Values that can be averaged component-wise.
pub trait WindowValue: Copy {
    fn zero() -> Self;
    fn accumulate(&mut self, other: &Self);
    fn divide(self, n: f64) -> Self;
}

impl WindowValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn accumulate(&mut self, other: &Self) {
        *self += other;
    }
    fn divide(self, n: f64) -> Self {
        self / n
    }
}

impl WindowValue for EmotionRow {
    fn zero() -> Self {
        [0.0; N_EMOTIONS]
    }
    fn accumulate(&mut self, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += b;
        }
    }
    fn divide(self, n: f64) -> Self {
        self.map(|v| v / n)
    }
}

/// Mean of every full window of `window` consecutive values. Output length
/// is `len - window + 1`, or zero when the input is shorter than the window.
pub fn rolling_mean<T: WindowValue>(values: &[T], window: usize) -> Result<Vec<T>> {
    if window == 0 {
        return Err(Error::Config("rolling window must be at least 1".into()));
    }
    Ok(values
        .windows(window)
        .map(|w| {
            let mut acc = T::zero();
            for v in w {
                acc.accumulate(v);
            }
            acc.divide(window as f64)
        })
        .collect())
}

/// Rolling mean over day-indexed values starting at `start_day`.
pub fn smooth<T: WindowValue>(
    values: &[T],
    start_day: NaiveDate,
    window: usize,
    alignment: Alignment,
) -> Result<SmoothedSeries<T>> {
    let smoothed = rolling_mean(values, window)?;
    let diagnostic = (values.len() < window).then(|| {
        format!(
            "series of {} days is shorter than the {window}-day window",
            values.len()
        )
    });
    Ok(SmoothedSeries {
        window,
        first_day: start_day + Duration::days(alignment.label_offset(window) as i64),
        values: smoothed,
        diagnostic,
    })
}

/// Smoothed emotion means, imputing the uniform vector on empty days.
pub fn smooth_emotions(
    daily: &DailySeries,
    window: usize,
    alignment: Alignment,
) -> Result<SmoothedSeries<EmotionRow>> {
    smooth(&daily.emotion_rows(), daily.start_day, window, alignment)
}

/// Smoothed document counts; empty days count as zero.
pub fn smooth_counts(
    daily: &DailySeries,
    window: usize,
    alignment: Alignment,
) -> Result<SmoothedSeries<f64>> {
    smooth(&daily.counts(), daily.start_day, window, alignment)
}

/// Buckets scored documents into calendar days under the configured offset
/// and averages their vectors. Every day of the interval is present.
pub fn aggregate_daily(scored: &[ScoredDocument], cfg: &CorpusConfig) -> Result<DailySeries> {
    let start_day = cfg.first_day();
    let n_days = cfg.n_days();
    let mut sums = vec![[0.0; N_EMOTIONS]; n_days];
    let mut counts = vec![0usize; n_days];
    for doc in scored {
        if !cfg.contains(doc.timestamp) {
            return Err(Error::Validation(format!(
                "document {:?} ({}) lies outside the analysis interval",
                doc.id, doc.channel
            )));
        }
        let index = (cfg.day_of(doc.timestamp) - start_day).num_days() as usize;
        sums[index].accumulate(&doc.emotion.0);
        counts[index] += 1;
    }
    let days = sums
        .into_iter()
        .zip(counts)
        .map(|(sum, count)| DayRecord {
            count,
            mean: (count > 0).then(|| EmotionVector(sum.divide(count as f64))),
        })
        .collect();
    Ok(DailySeries { start_day, days })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeSeries {
    pub start_day: NaiveDate,
    pub counts: Vec<usize>,
    pub smoothed: SmoothedSeries<f64>,
}

/// Documents per day and their rolling mean.
pub fn volume_series(
    docs: &[Document],
    cfg: &CorpusConfig,
    window: usize,
    alignment: Alignment,
) -> Result<VolumeSeries> {
    let start_day = cfg.first_day();
    let mut counts = vec![0usize; cfg.n_days()];
    for doc in docs {
        if !cfg.contains(doc.timestamp) {
            return Err(Error::Validation(format!(
                "document {:?} ({}) lies outside the analysis interval",
                doc.id, doc.channel
            )));
        }
        counts[(cfg.day_of(doc.timestamp) - start_day).num_days() as usize] += 1;
    }
    let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let smoothed = smooth(&as_f64, start_day, window, alignment)?;
    Ok(VolumeSeries {
        start_day,
        counts,
        smoothed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverEvent {
    pub emotion_a: Emotion,
    pub emotion_b: Emotion,
    pub day: NaiveDate,
    /// `a - b` on the day before the crossing.
    pub pre_gap: f64,
    /// `a - b` on the crossing day.
    pub post_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Crossover {
    At(CrossoverEvent),
    /// `b` already exceeded `a` on the first day and never re-crossed.
    PreCrossed,
    Never,
}

impl Crossover {
    pub fn event(&self) -> Option<&CrossoverEvent> {
        match self {
            Crossover::At(e) => Some(e),
            _ => None,
        }
    }
}

/// First index `t >= 1` with `b[t] > a[t]` and `b[t-1] <= a[t-1]`.
pub fn first_crossing(a: &[f64], b: &[f64]) -> Option<usize> {
    let n = a.len().min(b.len());
    (1..n).find(|&t| b[t] > a[t] && b[t - 1] <= a[t - 1])
}

/// The first day on which emotion `b` strictly overtakes emotion `a`.
pub fn detect_crossover(
    smoothed: &SmoothedSeries<EmotionRow>,
    a: Emotion,
    b: Emotion,
) -> Crossover {
    let va = smoothed.column(a);
    let vb = smoothed.column(b);
    match first_crossing(&va, &vb) {
        Some(t) => Crossover::At(CrossoverEvent {
            emotion_a: a,
            emotion_b: b,
            day: smoothed.day(t),
            pre_gap: va[t - 1] - vb[t - 1],
            post_gap: va[t] - vb[t],
        }),
        None if !va.is_empty() && vb[0] > va[0] => Crossover::PreCrossed,
        None => Crossover::Never,
    }
}
