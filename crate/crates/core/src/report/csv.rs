use chrono::{Duration, NaiveDate};

use crate::emotion::{Emotion, EmotionVector, N_EMOTIONS};
use crate::error::{Error, Result};
use crate::timeseries::{DailySeries, DayRecord, EmotionRow, SmoothedSeries, VolumeSeries};

pub const SERIES_HEADER: &str =
    "day,count,fear,sadness,surprise,anticipation,joy,anger,disgust,trust";
pub const VOLUME_HEADER: &str = "day,social,news,social_smoothed,news_smoothed";

fn bad(message: impl Into<String>) -> Error {
    Error::Format {
        path: "<csv>".into(),
        message: message.into(),
    }
}

fn push_row(out: &mut String, day: NaiveDate, count: &str, row: Option<&EmotionRow>) {
    out.push_str(&day.to_string());
    out.push(',');
    out.push_str(count);
    for i in 0..N_EMOTIONS {
        out.push(',');
        if let Some(r) = row {
            out.push_str(&format!("{:.6}", r[i]));
        }
    }
    out.push('\n');
}

/// One line per day; emotion columns are empty on days without documents.
pub fn write_daily_csv(daily: &DailySeries) -> String {
    let mut out = format!("{SERIES_HEADER}\n");
    for (i, rec) in daily.days.iter().enumerate() {
        push_row(
            &mut out,
            daily.day(i),
            &rec.count.to_string(),
            rec.mean.as_ref().map(|m| &m.0),
        );
    }
    out
}

/// Smoothed emotions with the smoothed volume in the `count` column.
pub fn write_smoothed_csv(
    emotions: &SmoothedSeries<EmotionRow>,
    volume: &SmoothedSeries<f64>,
) -> String {
    debug_assert_eq!(emotions.first_day, volume.first_day);
    debug_assert_eq!(emotions.len(), volume.len());
    let mut out = format!("{SERIES_HEADER}\n");
    for (i, (row, v)) in emotions.values.iter().zip(&volume.values).enumerate() {
        push_row(&mut out, emotions.day(i), &format!("{v:.6}"), Some(row));
    }
    out
}

struct Row<'a> {
    day: NaiveDate,
    fields: Vec<&'a str>,
}

fn parse_rows<'a>(text: &'a str, header: &str) -> Result<Vec<Row<'a>>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == header => {}
        other => return Err(bad(format!("expected header {header:?}, found {other:?}"))),
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    let mut expected_day: Option<NaiveDate> = None;
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(bad(format!("line {}: expected {width} fields", i + 2)));
        }
        let day: NaiveDate = fields[0]
            .parse()
            .map_err(|e| bad(format!("line {}: day {:?}: {e}", i + 2, fields[0])))?;
        if let Some(d) = expected_day {
            if d != day {
                return Err(bad(format!(
                    "line {}: expected day {d}, found {day}",
                    i + 2
                )));
            }
        }
        expected_day = Some(day + Duration::days(1));
        rows.push(Row { day, fields });
    }
    Ok(rows)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|e| bad(format!("number {s:?}: {e}")))
}

fn parse_emotions(fields: &[&str]) -> Result<Option<EmotionRow>> {
    if fields.iter().all(|f| f.is_empty()) {
        return Ok(None);
    }
    let mut row = [0.0; N_EMOTIONS];
    for e in Emotion::ALL {
        row[e.index()] = parse_f64(fields[e.index()])?;
    }
    Ok(Some(row))
}

/// Inverse of [`write_daily_csv`], up to the six printed decimals.
pub fn read_daily_csv(text: &str) -> Result<DailySeries> {
    let rows = parse_rows(text, SERIES_HEADER)?;
    let start_day = rows
        .first()
        .map(|r| r.day)
        .ok_or_else(|| bad("daily series has no rows"))?;
    let days = rows
        .iter()
        .map(|r| {
            let count: usize = r.fields[1]
                .parse()
                .map_err(|e| bad(format!("count {:?}: {e}", r.fields[1])))?;
            Ok(DayRecord {
                count,
                mean: parse_emotions(&r.fields[2..])?.map(EmotionVector),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DailySeries { start_day, days })
}

/// Inverse of [`write_smoothed_csv`]. `window` is not stored in the file.
pub fn read_smoothed_csv(
    text: &str,
    window: usize,
) -> Result<(SmoothedSeries<EmotionRow>, SmoothedSeries<f64>)> {
    let rows = parse_rows(text, SERIES_HEADER)?;
    let first_day = rows.first().map(|r| r.day).unwrap_or_default();
    let mut emotions = Vec::with_capacity(rows.len());
    let mut volume = Vec::with_capacity(rows.len());
    for r in &rows {
        volume.push(parse_f64(r.fields[1])?);
        emotions.push(
            parse_emotions(&r.fields[2..])?.ok_or_else(|| bad("smoothed row without values"))?,
        );
    }
    let diagnostic = rows
        .is_empty()
        .then(|| "smoothed series is empty".to_string());
    Ok((
        SmoothedSeries {
            window,
            first_day,
            values: emotions,
            diagnostic: diagnostic.clone(),
        },
        SmoothedSeries {
            window,
            first_day,
            values: volume,
            diagnostic,
        },
    ))
}

/// Daily counts for both channels with their smoothed values.
pub fn write_volume_csv(social: &VolumeSeries, news: &VolumeSeries) -> String {
    debug_assert_eq!(social.start_day, news.start_day);
    let mut out = format!("{VOLUME_HEADER}\n");
    for (i, (s, n)) in social.counts.iter().zip(&news.counts).enumerate() {
        let day = social.start_day + Duration::days(i as i64);
        let fmt = |v: &VolumeSeries| {
            v.smoothed
                .index_of(day)
                .map(|k| format!("{:.6}", v.smoothed.values[k]))
                .unwrap_or_default()
        };
        out.push_str(&format!("{day},{s},{n},{},{}\n", fmt(social), fmt(news)));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeTable {
    pub start_day: NaiveDate,
    pub social: Vec<usize>,
    pub news: Vec<usize>,
    /// `(day, social, news)` for days carrying a smoothed value.
    pub smoothed: Vec<(NaiveDate, f64, f64)>,
}

pub fn read_volume_csv(text: &str) -> Result<VolumeTable> {
    let rows = parse_rows(text, VOLUME_HEADER)?;
    let start_day = rows
        .first()
        .map(|r| r.day)
        .ok_or_else(|| bad("volume table has no rows"))?;
    let mut table = VolumeTable {
        start_day,
        social: Vec::new(),
        news: Vec::new(),
        smoothed: Vec::new(),
    };
    for r in &rows {
        let count = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| bad(format!("count {s:?}: {e}")))
        };
        table.social.push(count(r.fields[1])?);
        table.news.push(count(r.fields[2])?);
        match (r.fields[3], r.fields[4]) {
            ("", "") => {}
            (s, n) => table.smoothed.push((r.day, parse_f64(s)?, parse_f64(n)?)),
        }
    }
    Ok(table)
}
