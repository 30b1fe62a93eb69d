//! Data products: series CSVs, JSON reports and SVG plots.

mod csv;
mod svg;

pub use self::csv::{
    read_daily_csv, read_smoothed_csv, read_volume_csv, write_daily_csv, write_smoothed_csv,
    write_volume_csv, VolumeTable, SERIES_HEADER, VOLUME_HEADER,
};
pub use self::svg::{
    render_te_bars_svg, render_timeseries_svg, PlotKind, PlotSpec, DIRECTION_COLORS, EMOTION_COLORS,
};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infoflow::TeResult;
use crate::timeseries::{Crossover, CrossoverEvent};

/// Serialized crossover outcome for one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CrossoverRecord {
    Crossed(CrossoverEvent),
    PreCrossed,
    Never,
}

impl From<&Crossover> for CrossoverRecord {
    fn from(c: &Crossover) -> Self {
        match c {
            Crossover::At(e) => CrossoverRecord::Crossed(e.clone()),
            Crossover::PreCrossed => CrossoverRecord::PreCrossed,
            Crossover::Never => CrossoverRecord::Never,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn te_report_json(results: &[TeResult]) -> String {
    to_json_pretty(results)
}

pub fn read_te_report(path: &Path) -> Result<Vec<TeResult>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingArtifact(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
