use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::surrogate::significance_with_specs;
use super::{discretize, te_symbols, BinningSpec, RangePolicy};
use crate::emotion::Emotion;
use crate::error::{Error, Result};
use crate::timeseries::{DailySeries, EmotionRow, SmoothedSeries};

/// Transfer entropy in both directions over one aligned pair of series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BidirectionalTe {
    pub te_x_to_y: f64,
    pub te_y_to_x: f64,
    /// Number of transitions counted (series length minus lag).
    pub n_samples: usize,
}

/// Discretizes each series on its own and estimates transfer entropy
/// `x -> y` and `y -> x`.
pub fn bidirectional_te(
    x: &[f64],
    y: &[f64],
    spec: &BinningSpec,
    lag: usize,
) -> Result<BidirectionalTe> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let xs = discretize(x, spec)?;
    let ys = discretize(y, spec)?;
    Ok(BidirectionalTe {
        te_x_to_y: te_symbols(&xs, &ys, lag)?,
        te_y_to_x: te_symbols(&ys, &xs, lag)?,
        n_samples: x.len().saturating_sub(lag),
    })
}

/// Inclusive day range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DayWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DayWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        DayWindow { start, end }
    }

    pub fn n_days(&self) -> usize {
        ((self.end - self.start).num_days() + 1).max(0) as usize
    }

    fn overlaps(&self, other: &DayWindow) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// Day-labeled emotion rows, the input to the windowed analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionSeries {
    pub start_day: NaiveDate,
    pub rows: Vec<EmotionRow>,
}

impl EmotionSeries {
    pub fn from_daily(daily: &DailySeries) -> Self {
        EmotionSeries {
            start_day: daily.start_day,
            rows: daily.emotion_rows(),
        }
    }

    pub fn from_smoothed(smoothed: &SmoothedSeries<EmotionRow>) -> Self {
        EmotionSeries {
            start_day: smoothed.first_day,
            rows: smoothed.values.clone(),
        }
    }

    pub fn column(&self, emotion: Emotion) -> Vec<f64> {
        self.rows.iter().map(|r| r[emotion.index()]).collect()
    }

    pub fn span(&self) -> Option<DayWindow> {
        let n = self.rows.len();
        (n > 0).then(|| {
            DayWindow::new(
                self.start_day,
                self.start_day + Duration::days(n as i64 - 1),
            )
        })
    }
}

/// Whether windowed binning ranges come from the window slice or from the
/// whole series.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeScope {
    #[default]
    PerWindow,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Significance {
    pub n_surrogates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeOptions {
    pub binning: BinningSpec,
    pub lag: usize,
    #[serde(default)]
    pub range_scope: RangeScope,
    #[serde(default)]
    pub significance: Option<Significance>,
}

impl Default for TeOptions {
    fn default() -> Self {
        TeOptions {
            binning: BinningSpec::default(),
            lag: 1,
            range_scope: RangeScope::PerWindow,
            significance: None,
        }
    }
}

/// One emotion, one window, both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeResult {
    pub emotion: Emotion,
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    #[serde(rename = "te_x_to_y_bits")]
    pub te_x_to_y: f64,
    #[serde(rename = "te_y_to_x_bits")]
    pub te_y_to_x: f64,
    pub n_samples: usize,
    pub n_bins: usize,
    pub lag: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_x_to_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_y_to_x: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindowedTe {
    /// Window-major, emotions in canonical order within each window.
    pub results: Vec<TeResult>,
    /// Windows skipped for being too short.
    pub diagnostics: Vec<String>,
}

/// Mixes the run seed with window and emotion so each surrogate stream is
/// fixed regardless of which other windows are requested.
fn derive_seed(seed: u64, window: &DayWindow, emotion: Emotion) -> u64 {
    let day = window
        .start
        .signed_duration_since(NaiveDate::default())
        .num_days() as u64;
    let mut z = seed
        ^ day.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ ((emotion.index() as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03));
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn global_range(values: &[f64], spec: &BinningSpec) -> BinningSpec {
    match spec.range {
        RangePolicy::Fixed { .. } => *spec,
        RangePolicy::PerSeriesMinMax => {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo < hi {
                BinningSpec::fixed(spec.n_bins, lo, hi)
            } else {
                *spec
            }
        }
    }
}

/// Transfer entropy per emotion and per window between `x` and `y`.
///
/// Windows must not overlap and must lie inside the common span. A window
/// holding fewer than `lag + 2` days is reported in `diagnostics` and
/// skipped.
pub fn windowed_te(
    x: &EmotionSeries,
    y: &EmotionSeries,
    windows: &[DayWindow],
    opts: &TeOptions,
) -> Result<WindowedTe> {
    opts.binning.validate()?;
    if opts.lag == 0 {
        return Err(Error::Config("lag must be at least 1".into()));
    }
    if x.start_day != y.start_day || x.rows.len() != y.rows.len() {
        return Err(Error::Validation(format!(
            "series are not aligned: {} days from {} vs {} days from {}",
            x.rows.len(),
            x.start_day,
            y.rows.len(),
            y.start_day
        )));
    }
    let span = x
        .span()
        .ok_or_else(|| Error::Validation("empty series".into()))?;
    for (i, w) in windows.iter().enumerate() {
        if w.start > w.end {
            return Err(Error::Config(format!(
                "window {} to {} is reversed",
                w.start, w.end
            )));
        }
        if w.start < span.start || w.end > span.end {
            return Err(Error::Config(format!(
                "window {} to {} lies outside the series span {} to {}",
                w.start, w.end, span.start, span.end
            )));
        }
        if let Some(other) = windows[..i].iter().find(|o| o.overlaps(w)) {
            return Err(Error::Config(format!(
                "windows {} to {} and {} to {} overlap",
                other.start, other.end, w.start, w.end
            )));
        }
    }

    let mut out = WindowedTe::default();
    for w in windows {
        let n = w.n_days();
        if n < opts.lag + 2 {
            out.diagnostics.push(format!(
                "window {} to {} has {n} days; at least {} needed for lag {}",
                w.start,
                w.end,
                opts.lag + 2,
                opts.lag
            ));
            continue;
        }
        let from = (w.start - span.start).num_days() as usize;
        let range = from..from + n;
        for emotion in Emotion::ALL {
            let xs = x.column(emotion);
            let ys = y.column(emotion);
            let (x_spec, y_spec) = match opts.range_scope {
                RangeScope::PerWindow => (opts.binning, opts.binning),
                RangeScope::Global => (
                    global_range(&xs, &opts.binning),
                    global_range(&ys, &opts.binning),
                ),
            };
            let (xw, yw) = (&xs[range.clone()], &ys[range.clone()]);
            let xsym = discretize(xw, &x_spec)?;
            let ysym = discretize(yw, &y_spec)?;
            let te_x_to_y = te_symbols(&xsym, &ysym, opts.lag)?;
            let te_y_to_x = te_symbols(&ysym, &xsym, opts.lag)?;
            let (p_x_to_y, p_y_to_x) = match opts.significance {
                Some(sig) => {
                    let p = significance_with_specs(
                        xw,
                        yw,
                        (&x_spec, &y_spec),
                        opts.lag,
                        sig.n_surrogates,
                        derive_seed(sig.seed, w, emotion),
                    )?;
                    (Some(p.p_x_to_y), Some(p.p_y_to_x))
                }
                None => (None, None),
            };
            out.results.push(TeResult {
                emotion,
                window_start: w.start,
                window_end: w.end,
                te_x_to_y,
                te_y_to_x,
                n_samples: n - opts.lag,
                n_bins: opts.binning.n_bins,
                lag: opts.lag,
                p_x_to_y,
                p_y_to_x,
            });
        }
    }
    Ok(out)
}
