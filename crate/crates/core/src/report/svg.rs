//! Static SVG plots. Output is a pure function of the inputs: fixed canvas,
//! fixed number formatting, no timestamps.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::{Duration, NaiveDate};

use crate::emotion::{Emotion, N_EMOTIONS};
use crate::error::{Error, Result};
use crate::infoflow::TeResult;
use crate::timeseries::SmoothedSeries;

/// fear blue, sadness orange, surprise green, anticipation red, joy purple,
/// anger brown, disgust pink, trust gray.
pub const EMOTION_COLORS: [&str; N_EMOTIONS] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// `x -> y` orange, `y -> x` blue.
pub const DIRECTION_COLORS: [&str; 2] = ["#ff7f0e", "#1f77b4"];

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const FONT: &str = "font-family=\"Helvetica, Arial, sans-serif\"";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    TimeseriesLines,
    GroupedBars,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    pub labels: Vec<String>,
    pub colors: Vec<String>,
    pub y_label: String,
    pub output: Option<PathBuf>,
}

impl PlotSpec {
    /// Eight lines in canonical emotion order and palette.
    pub fn emotions(title: impl Into<String>) -> Self {
        PlotSpec {
            kind: PlotKind::TimeseriesLines,
            title: title.into(),
            labels: Emotion::ALL.iter().map(|e| e.name().to_string()).collect(),
            colors: EMOTION_COLORS.iter().map(|c| c.to_string()).collect(),
            y_label: "score (7-day mean)".into(),
            output: None,
        }
    }

    pub fn lines(title: impl Into<String>, labels: &[&str], colors: &[&str]) -> Self {
        PlotSpec {
            kind: PlotKind::TimeseriesLines,
            title: title.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            colors: colors.iter().map(|s| s.to_string()).collect(),
            y_label: String::new(),
            output: None,
        }
    }

    /// Two bars per emotion, labeled for the `x -> y` and `y -> x` directions.
    pub fn te_bars(title: impl Into<String>, x_to_y: &str, y_to_x: &str) -> Self {
        PlotSpec {
            kind: PlotKind::GroupedBars,
            title: title.into(),
            labels: vec![x_to_y.to_string(), y_to_x.to_string()],
            colors: DIRECTION_COLORS.iter().map(|c| c.to_string()).collect(),
            y_label: "transfer entropy (bits)".into(),
            output: None,
        }
    }

    pub fn with_y_label(mut self, y_label: impl Into<String>) -> Self {
        self.y_label = y_label.into();
        self
    }

    fn validate(&self, kind: PlotKind, n_series: usize) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Plot(format!(
                "plot spec is {:?}, expected {kind:?}",
                self.kind
            )));
        }
        if self.labels.is_empty() {
            return Err(Error::Plot("plot needs at least one series".into()));
        }
        if self.labels.len() != n_series || self.colors.len() != n_series {
            return Err(Error::Plot(format!(
                "{n_series} series but {} labels and {} colors",
                self.labels.len(),
                self.colors.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::Plot(format!("duplicate series label {dup:?}")));
        }
        Ok(())
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="16" {FONT}>{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn legend(out: &mut String, labels: &[String], colors: &[String]) {
    let x = WIDTH - RIGHT + 20.0;
    let _ = writeln!(out, r#"<g class="legend">"#);
    for (i, (label, color)) in labels.iter().zip(colors).enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.2}" width="14" height="10" fill="{}"/>"#,
            y - 9.0,
            escape(color)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{y:.2}" font-size="12" {FONT}>{}</text>"#,
            x + 20.0,
            escape(label)
        );
    }
    let _ = writeln!(out, "</g>");
}

/// Linear map from a value range to the plot's vertical pixel range.
#[derive(Debug, Clone, Copy)]
struct YScale {
    lo: f64,
    hi: f64,
}

impl YScale {
    /// Data range widened by 5% on both sides. A flat range gets 5% of its
    /// magnitude (or 0.05 around zero).
    fn padded(min: f64, max: f64) -> Self {
        let span = max - min;
        let pad = if span > 0.0 {
            0.05 * span
        } else if min != 0.0 {
            0.05 * min.abs()
        } else {
            0.05
        };
        YScale {
            lo: min - pad,
            hi: max + pad,
        }
    }

    fn pixel(&self, v: f64) -> f64 {
        let h = HEIGHT - TOP - BOTTOM;
        TOP + (self.hi - v) / (self.hi - self.lo) * h
    }
}

fn y_axis(out: &mut String, scale: YScale, y_label: &str) {
    let bottom = HEIGHT - BOTTOM;
    let right = WIDTH - RIGHT;
    let _ = writeln!(
        out,
        r##"<g class="axes" stroke="#333333" stroke-width="1">"##
    );
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{bottom:.2}"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT:.2}" y1="{bottom:.2}" x2="{right:.2}" y2="{bottom:.2}"/>"#
    );
    let _ = writeln!(out, "</g>");
    for i in 0..=4 {
        let v = scale.lo + (scale.hi - scale.lo) * i as f64 / 4.0;
        let y = scale.pixel(v);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="#333333"/>"##,
            LEFT - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11" {FONT}>{v:.3}</text>"#,
            LEFT - 8.0,
            y + 4.0
        );
    }
    if !y_label.is_empty() {
        let cy = (TOP + bottom) / 2.0;
        let _ = writeln!(
            out,
            r#"<text x="16" y="{cy:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {cy:.2})" {FONT}>{}</text>"#,
            escape(y_label)
        );
    }
}

/// One polyline per series over a shared date axis.
pub fn render_timeseries_svg(series: &[SmoothedSeries<f64>], spec: &PlotSpec) -> Result<Vec<u8>> {
    spec.validate(PlotKind::TimeseriesLines, series.len())?;
    if let Some(i) = series.iter().position(|s| s.is_empty()) {
        return Err(Error::Plot(format!("series {:?} is empty", spec.labels[i])));
    }
    if series
        .iter()
        .flat_map(|s| &s.values)
        .any(|v| !v.is_finite())
    {
        return Err(Error::Plot("non-finite value in series".into()));
    }
    let first = series.iter().map(|s| s.first_day).min().expect("non-empty");
    let last = series
        .iter()
        .filter_map(|s| s.last_day())
        .max()
        .expect("non-empty");
    let n_days = (last - first).num_days();
    let plot_w = WIDTH - LEFT - RIGHT;
    let x_of = |day: NaiveDate| {
        if n_days == 0 {
            LEFT + plot_w / 2.0
        } else {
            LEFT + (day - first).num_days() as f64 / n_days as f64 * plot_w
        }
    };
    let (min, max) = series
        .iter()
        .flat_map(|s| &s.values)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let scale = YScale::padded(min, max);

    let mut out = String::new();
    header(&mut out, &spec.title);
    y_axis(&mut out, scale, &spec.y_label);
    let bottom = HEIGHT - BOTTOM;
    let mut tick = 0;
    while tick <= n_days {
        let day = first + Duration::days(tick);
        let x = x_of(day);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333333"/>"##,
            bottom + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11" {FONT}>{day}</text>"#,
            bottom + 18.0
        );
        tick += 7;
    }
    let _ = writeln!(out, r#"<g class="series" fill="none" stroke-width="1.5">"#);
    for (s, (label, color)) in series.iter().zip(spec.labels.iter().zip(&spec.colors)) {
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x_of(s.day(i)), scale.pixel(v)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline data-series="{}" stroke="{}" points="{}"/>"#,
            escape(label),
            escape(color),
            points.join(" ")
        );
    }
    let _ = writeln!(out, "</g>");
    legend(&mut out, &spec.labels, &spec.colors);
    out.push_str("</svg>\n");
    Ok(out.into_bytes())
}

/// Two bars (`x -> y`, `y -> x`) per emotion in canonical order. Expects
/// exactly one result per emotion, all from the same window.
pub fn render_te_bars_svg(results: &[TeResult], spec: &PlotSpec) -> Result<Vec<u8>> {
    spec.validate(PlotKind::GroupedBars, 2)?;
    let mut by_emotion: [Option<&TeResult>; N_EMOTIONS] = [None; N_EMOTIONS];
    for r in results {
        let slot = &mut by_emotion[r.emotion.index()];
        if slot.is_some() {
            return Err(Error::Plot(format!(
                "duplicate result for emotion {}",
                r.emotion
            )));
        }
        *slot = Some(r);
    }
    if let Some(missing) = Emotion::ALL
        .iter()
        .find(|e| by_emotion[e.index()].is_none())
    {
        return Err(Error::Plot(format!("no result for emotion {missing}")));
    }
    let rows: Vec<&TeResult> = by_emotion.iter().map(|r| r.expect("checked")).collect();
    let window = (rows[0].window_start, rows[0].window_end);
    if rows
        .iter()
        .any(|r| (r.window_start, r.window_end) != window)
    {
        return Err(Error::Plot("results span more than one window".into()));
    }
    if rows
        .iter()
        .any(|r| !r.te_x_to_y.is_finite() || !r.te_y_to_x.is_finite())
    {
        return Err(Error::Plot("non-finite transfer entropy".into()));
    }
    let max = rows
        .iter()
        .flat_map(|r| [r.te_x_to_y, r.te_y_to_x])
        .fold(0.0f64, f64::max);
    let scale = YScale {
        lo: 0.0,
        hi: if max > 0.0 { max * 1.05 } else { 1.0 },
    };

    let mut out = String::new();
    header(&mut out, &spec.title);
    y_axis(&mut out, scale, &spec.y_label);
    let plot_w = WIDTH - LEFT - RIGHT;
    let group_w = plot_w / N_EMOTIONS as f64;
    let bar_w = group_w * 0.35;
    let base = scale.pixel(0.0);
    let _ = writeln!(out, r#"<g class="bars">"#);
    for (i, r) in rows.iter().enumerate() {
        let gx = LEFT + group_w * i as f64;
        for (k, (value, direction)) in [(r.te_x_to_y, "x_to_y"), (r.te_y_to_x, "y_to_x")]
            .into_iter()
            .enumerate()
        {
            let top = scale.pixel(value);
            let _ = writeln!(
                out,
                r#"<rect data-emotion="{}" data-direction="{direction}" x="{:.2}" y="{top:.2}" width="{bar_w:.2}" height="{:.2}" fill="{}"/>"#,
                r.emotion,
                gx + group_w * 0.15 + bar_w * k as f64,
                base - top,
                escape(&spec.colors[k])
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11" {FONT}>{}</text>"#,
            gx + group_w / 2.0,
            HEIGHT - BOTTOM + 18.0,
            r.emotion
        );
    }
    let _ = writeln!(out, "</g>");
    legend(&mut out, &spec.labels, &spec.colors);
    out.push_str("</svg>\n");
    Ok(out.into_bytes())
}
