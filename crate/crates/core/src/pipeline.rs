//! Config-driven orchestration: ingest, score, aggregate, te, plot.
//!
//! Every stage reads the previous stage's artifacts from the output
//! directory and writes its own, so running the stages one after another
//! produces exactly what [`run_pipeline`] produces.
//!
//! Artifacts (relative to the output directory):
//!
//! | stage     | files                                                        |
//! |-----------|--------------------------------------------------------------|
//! | ingest    | `ingested_social.jsonl`, `ingested_news.jsonl`               |
//! | score     | `scored_social.jsonl`, `scored_news.jsonl`                   |
//! | aggregate | `daily_*.csv`, `smoothed_*.csv`, `volume.csv`, `crossover.json` |
//! | te        | `te_report.json`                                             |
//! | plot      | `volume.svg`, `emotions_*.svg`, `te_full.svg`, `te_<start>_<end>.svg` |
//!
//! [`run_pipeline`] also writes `manifest.json`, listing every artifact with
//! its SHA-256.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{
    check_unique_ids, filter_corpus, parse_jsonl, Channel, CorpusConfig, Document,
};
use crate::emotion::Emotion;
use crate::error::{Error, Result};
use crate::infoflow::{
    windowed_te, BinningSpec, DayWindow, EmotionSeries, RangeScope, Significance, TeOptions,
    TeResult,
};
use crate::report::{
    read_daily_csv, read_smoothed_csv, read_te_report, read_volume_csv, render_te_bars_svg,
    render_timeseries_svg, te_report_json, to_json_pretty, write_daily_csv, write_smoothed_csv,
    write_volume_csv, CrossoverRecord, PlotSpec,
};
use crate::scoring::{score_all_lexicon, score_external, ExternalScorer, Lexicon, ScoredDocument};
use crate::timeseries::{
    aggregate_daily, detect_crossover, smooth, smooth_counts, smooth_emotions, Alignment,
    SmoothedSeries, VolumeSeries, DEFAULT_WINDOW,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    /// Command line of an external scorer speaking the plugin protocol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<Vec<String>>,
    #[serde(default = "default_smoothing")]
    pub smoothing_mass: f64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_smoothing() -> f64 {
    Lexicon::DEFAULT_SMOOTHING
}

fn default_timeout() -> u64 {
    30
}

/// Series fed to the transfer entropy stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeInput {
    /// Daily means, empty days imputed as uniform.
    #[default]
    Daily,
    /// Rolling means. Smoothing adds autocorrelation and inflates TE.
    Smoothed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignificanceConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_surrogates")]
    pub n_surrogates: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_surrogates() -> usize {
    99
}

impl Default for SignificanceConfig {
    fn default() -> Self {
        SignificanceConfig {
            enabled: false,
            n_surrogates: default_surrogates(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossoverPair {
    pub a: Emotion,
    pub b: Emotion,
}

impl Default for CrossoverPair {
    fn default() -> Self {
        CrossoverPair {
            a: Emotion::Fear,
            b: Emotion::Anticipation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub social: PathBuf,
    pub news: PathBuf,
    pub scorer: ScorerConfig,
    pub corpus: CorpusConfig,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub alignment: Alignment,
    #[serde(default)]
    pub binning: BinningSpec,
    #[serde(default = "default_lag")]
    pub lag: usize,
    #[serde(default)]
    pub te_windows: Vec<DayWindow>,
    #[serde(default)]
    pub te_input: TeInput,
    #[serde(default)]
    pub range_scope: RangeScope,
    #[serde(default)]
    pub significance: SignificanceConfig,
    #[serde(default)]
    pub crossover: CrossoverPair,
    pub output_dir: PathBuf,
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

fn default_lag() -> usize {
    1
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub bins: Option<usize>,
    pub window: Option<usize>,
    pub lag: Option<usize>,
}

impl PipelineConfig {
    /// Reads a JSON config. Relative paths are taken relative to the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.social);
        resolve(&mut cfg.news);
        resolve(&mut cfg.output_dir);
        if let Some(lex) = cfg.scorer.lexicon.as_mut() {
            resolve(lex);
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.output_dir {
            self.output_dir = out.clone();
        }
        if let Some(seed) = o.seed {
            self.significance.seed = seed;
        }
        if let Some(bins) = o.bins {
            self.binning.n_bins = bins;
        }
        if let Some(window) = o.window {
            self.window = window;
        }
        if let Some(lag) = o.lag {
            self.lag = lag;
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.scorer.lexicon, &self.scorer.external) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "select exactly one scorer: both `lexicon` and `external` are set".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "select exactly one scorer: neither `lexicon` nor `external` is set".into(),
                ))
            }
            (None, Some(cmd)) if cmd.is_empty() => {
                return Err(Error::Config("external scorer command is empty".into()))
            }
            _ => {}
        }
        self.corpus.validate()?;
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if self.lag == 0 {
            return Err(Error::Config("lag must be at least 1".into()));
        }
        self.binning.validate()?;
        if self.significance.enabled
            && self.significance.n_surrogates < crate::infoflow::MIN_SURROGATES
        {
            return Err(Error::Config(format!(
                "n_surrogates must be at least {}",
                crate::infoflow::MIN_SURROGATES
            )));
        }
        if self.crossover.a == self.crossover.b {
            return Err(Error::Config(
                "crossover needs two different emotions".into(),
            ));
        }
        for w in &self.te_windows {
            if w.start > w.end {
                return Err(Error::Config(format!(
                    "window {} to {} is reversed",
                    w.start, w.end
                )));
            }
        }
        Ok(())
    }

    fn input(&self, channel: Channel) -> &Path {
        match channel {
            Channel::Social => &self.social,
            Channel::News => &self.news,
        }
    }

    fn te_options(&self) -> TeOptions {
        TeOptions {
            binning: self.binning,
            lag: self.lag,
            range_scope: self.range_scope,
            significance: self.significance.enabled.then_some(Significance {
                n_surrogates: self.significance.n_surrogates,
                seed: self.significance.seed,
            }),
        }
    }
}

/// What a stage wrote (paths relative to the output directory) and any
/// non-fatal problems it met.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageReport {
    pub artifacts: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl StageReport {
    fn extend(&mut self, other: StageReport) {
        self.artifacts.extend(other.artifacts);
        self.warnings.extend(other.warnings);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifacts: Vec<ManifestEntry>,
}

impl Manifest {
    /// Hashes the listed files under `root`; entries are sorted by path.
    pub fn build(root: &Path, artifacts: &[PathBuf]) -> Result<Manifest> {
        let mut entries = artifacts
            .iter()
            .map(|rel| {
                let full = root.join(rel);
                let bytes = fs::read(&full).map_err(|e| Error::io(&full, e))?;
                Ok(ManifestEntry {
                    path: rel.to_string_lossy().replace('\\', "/"),
                    sha256: hex::encode(Sha256::digest(&bytes)),
                    bytes: bytes.len() as u64,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        entries.dedup_by(|a, b| a.path == b.path);
        Ok(Manifest { artifacts: entries })
    }

    pub fn to_json(&self) -> String {
        to_json_pretty(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub warnings: Vec<String>,
}

fn write_artifact(
    cfg: &PipelineConfig,
    report: &mut StageReport,
    name: &str,
    bytes: &[u8],
) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let path = cfg.output_dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    report.artifacts.push(PathBuf::from(name));
    Ok(())
}

fn read_artifact(cfg: &PipelineConfig, name: &str) -> Result<String> {
    let path = cfg.output_dir.join(name);
    fs::read_to_string(&path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingArtifact(path.clone())
        } else {
            Error::io(&path, e)
        }
    })
}

fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| serde_json::to_string(i).expect("records serialize") + "\n")
        .collect()
}

fn from_jsonl<T: for<'de> Deserialize<'de>>(cfg: &PipelineConfig, name: &str) -> Result<Vec<T>> {
    let text = read_artifact(cfg, name)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Format {
                path: cfg.output_dir.join(name),
                message: format!("record {}: {e}", i + 1),
            })
        })
        .collect()
}

/// Parses both corpora, keeps each channel's documents, filters and
/// dedups them.
pub fn ingest(cfg: &PipelineConfig) -> Result<StageReport> {
    cfg.validate()?;
    let mut report = StageReport::default();
    for channel in Channel::ALL {
        let path = cfg.input(channel);
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let parsed = parse_jsonl(BufReader::new(file)).map_err(|e| Error::io(path, e))?;
        for d in &parsed.diagnostics {
            report.warnings.push(format!("{}: {d}", path.display()));
        }
        let (own, foreign): (Vec<Document>, Vec<Document>) = parsed
            .documents
            .into_iter()
            .partition(|d| d.channel == channel);
        if !foreign.is_empty() {
            report.warnings.push(format!(
                "{}: {} documents tagged with another channel ignored",
                path.display(),
                foreign.len()
            ));
        }
        let kept = filter_corpus(&own, &cfg.corpus);
        check_unique_ids(&kept)?;
        write_artifact(
            cfg,
            &mut report,
            &format!("ingested_{channel}.jsonl"),
            to_jsonl(&kept).as_bytes(),
        )?;
    }
    Ok(report)
}

/// Scores the ingested documents with the configured scorer.
pub fn score(cfg: &PipelineConfig) -> Result<StageReport> {
    cfg.validate()?;
    let mut report = StageReport::default();
    let lexicon = match &cfg.scorer.lexicon {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Some(Lexicon::from_json(&text, cfg.scorer.smoothing_mass)?)
        }
        None => None,
    };
    for channel in Channel::ALL {
        let docs: Vec<Document> = from_jsonl(cfg, &format!("ingested_{channel}.jsonl"))?;
        let scored: Vec<ScoredDocument> = match (&lexicon, &cfg.scorer.external) {
            (Some(lex), _) => score_all_lexicon(&docs, lex),
            (None, Some(argv)) => {
                let scorer = ExternalScorer::from_argv(argv)?
                    .with_timeout(Duration::from_secs(cfg.scorer.timeout_secs));
                let outcome = score_external(&docs, &scorer)?;
                report
                    .warnings
                    .extend(outcome.warnings.iter().map(|w| format!("{channel}: {w}")));
                for f in outcome.failures() {
                    report.warnings.push(format!(
                        "{channel}: document {:?} dropped: {:?}",
                        f.id, f.kind
                    ));
                }
                outcome.scored().cloned().collect()
            }
            (None, None) => unreachable!("validated"),
        };
        write_artifact(
            cfg,
            &mut report,
            &format!("scored_{channel}.jsonl"),
            to_jsonl(&scored).as_bytes(),
        )?;
    }
    Ok(report)
}

fn volume_from(
    daily: &crate::timeseries::DailySeries,
    smoothed: SmoothedSeries<f64>,
) -> VolumeSeries {
    VolumeSeries {
        start_day: daily.start_day,
        counts: daily.days.iter().map(|d| d.count).collect(),
        smoothed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverReport {
    pub emotion_a: Emotion,
    pub emotion_b: Emotion,
    pub window: usize,
    pub social: CrossoverRecord,
    pub news: CrossoverRecord,
}

/// Daily and smoothed series per channel, the volume table and the
/// crossover report.
pub fn aggregate(cfg: &PipelineConfig) -> Result<StageReport> {
    cfg.validate()?;
    let mut report = StageReport::default();
    let mut volumes = Vec::new();
    let mut crossovers = Vec::new();
    for channel in Channel::ALL {
        let scored: Vec<ScoredDocument> = from_jsonl(cfg, &format!("scored_{channel}.jsonl"))?;
        let daily = aggregate_daily(&scored, &cfg.corpus)?;
        let emotions = smooth_emotions(&daily, cfg.window, cfg.alignment)?;
        let counts = smooth_counts(&daily, cfg.window, cfg.alignment)?;
        if let Some(d) = &emotions.diagnostic {
            report.warnings.push(format!("{channel}: {d}"));
        }
        write_artifact(
            cfg,
            &mut report,
            &format!("daily_{channel}.csv"),
            write_daily_csv(&daily).as_bytes(),
        )?;
        write_artifact(
            cfg,
            &mut report,
            &format!("smoothed_{channel}.csv"),
            write_smoothed_csv(&emotions, &counts).as_bytes(),
        )?;
        let crossover = if emotions.is_empty() {
            crate::timeseries::Crossover::Never
        } else {
            detect_crossover(&emotions, cfg.crossover.a, cfg.crossover.b)
        };
        crossovers.push(CrossoverRecord::from(&crossover));
        volumes.push(volume_from(&daily, counts));
    }
    write_artifact(
        cfg,
        &mut report,
        "volume.csv",
        write_volume_csv(&volumes[0], &volumes[1]).as_bytes(),
    )?;
    let news = crossovers.pop().expect("two channels");
    let social = crossovers.pop().expect("two channels");
    let crossover = CrossoverReport {
        emotion_a: cfg.crossover.a,
        emotion_b: cfg.crossover.b,
        window: cfg.window,
        social,
        news,
    };
    write_artifact(
        cfg,
        &mut report,
        "crossover.json",
        to_json_pretty(&crossover).as_bytes(),
    )?;
    Ok(report)
}

fn load_te_input(cfg: &PipelineConfig, channel: Channel) -> Result<EmotionSeries> {
    match cfg.te_input {
        TeInput::Daily => {
            let text = read_artifact(cfg, &format!("daily_{channel}.csv"))?;
            Ok(EmotionSeries::from_daily(&read_daily_csv(&text)?))
        }
        TeInput::Smoothed => {
            let text = read_artifact(cfg, &format!("smoothed_{channel}.csv"))?;
            Ok(EmotionSeries::from_smoothed(
                &read_smoothed_csv(&text, cfg.window)?.0,
            ))
        }
    }
}

/// Transfer entropy social -> news (`x_to_y`) and news -> social
/// (`y_to_x`) per emotion, over the full span and each configured window.
pub fn te(cfg: &PipelineConfig) -> Result<StageReport> {
    cfg.validate()?;
    let mut report = StageReport::default();
    let social = load_te_input(cfg, Channel::Social)?;
    let news = load_te_input(cfg, Channel::News)?;
    let span = social
        .span()
        .ok_or_else(|| Error::Validation("no days to analyse".into()))?;
    let opts = cfg.te_options();

    let mut windows = cfg.te_windows.clone();
    if cfg.te_input == TeInput::Smoothed {
        // smoothed series start window-1 days late; clip to what exists
        windows = windows
            .into_iter()
            .filter_map(|w| {
                let clipped = DayWindow::new(w.start.max(span.start), w.end.min(span.end));
                (clipped.start <= clipped.end).then_some(clipped)
            })
            .collect();
    }

    let mut results: Vec<TeResult> = Vec::new();
    let full = windowed_te(&social, &news, &[span], &opts)?;
    report.warnings.extend(full.diagnostics);
    results.extend(full.results);
    let per_window = windowed_te(&social, &news, &windows, &opts)?;
    report.warnings.extend(per_window.diagnostics);
    results.extend(per_window.results);

    write_artifact(
        cfg,
        &mut report,
        "te_report.json",
        te_report_json(&results).as_bytes(),
    )?;
    Ok(report)
}

fn window_file(w: (chrono::NaiveDate, chrono::NaiveDate)) -> String {
    format!("te_{}_{}.svg", w.0, w.1)
}

/// Renders every plot from the aggregate and te artifacts.
pub fn plot(cfg: &PipelineConfig) -> Result<StageReport> {
    cfg.validate()?;
    let mut report = StageReport::default();
    let te_path = cfg.output_dir.join("te_report.json");
    let te_results = read_te_report(&te_path)?;

    let volume = read_volume_csv(&read_artifact(cfg, "volume.csv")?)?;
    if let Some(&(first, _, _)) = volume.smoothed.first() {
        let social: Vec<f64> = volume.smoothed.iter().map(|r| r.1).collect();
        let news: Vec<f64> = volume.smoothed.iter().map(|r| r.2).collect();
        let series = [
            smooth(&social, first, 1, Alignment::Trailing)?,
            smooth(&news, first, 1, Alignment::Trailing)?,
        ];
        let spec = PlotSpec::lines(
            format!("{}-day moving average of document counts", cfg.window),
            &["social", "news"],
            &["#1f77b4", "#2ca02c"],
        )
        .with_y_label("documents per day");
        write_artifact(
            cfg,
            &mut report,
            "volume.svg",
            &render_timeseries_svg(&series, &spec)?,
        )?;
    } else {
        report
            .warnings
            .push("volume series shorter than the window; volume.svg skipped".into());
    }

    for channel in Channel::ALL {
        let (emotions, _) = read_smoothed_csv(
            &read_artifact(cfg, &format!("smoothed_{channel}.csv"))?,
            cfg.window,
        )?;
        if emotions.is_empty() {
            report.warnings.push(format!(
                "{channel}: no smoothed values; emotion plot skipped"
            ));
            continue;
        }
        let series: Vec<SmoothedSeries<f64>> = Emotion::ALL
            .iter()
            .map(|&e| SmoothedSeries {
                window: emotions.window,
                first_day: emotions.first_day,
                values: emotions.column(e),
                diagnostic: None,
            })
            .collect();
        let spec = PlotSpec::emotions(format!(
            "Emotion scores ({channel}, {}-day moving average)",
            cfg.window
        ))
        .with_y_label("mean score");
        write_artifact(
            cfg,
            &mut report,
            &format!("emotions_{channel}.svg"),
            &render_timeseries_svg(&series, &spec)?,
        )?;
    }

    let mut windows: Vec<(chrono::NaiveDate, chrono::NaiveDate)> = Vec::new();
    for r in &te_results {
        let w = (r.window_start, r.window_end);
        if !windows.contains(&w) {
            windows.push(w);
        }
    }
    for (i, w) in windows.iter().enumerate() {
        let group: Vec<TeResult> = te_results
            .iter()
            .filter(|r| (r.window_start, r.window_end) == *w)
            .cloned()
            .collect();
        let spec = PlotSpec::te_bars(
            format!("Transfer entropy by emotion, {} to {}", w.0, w.1),
            "social to news",
            "news to social",
        );
        let name = if i == 0 {
            "te_full.svg".to_string()
        } else {
            window_file(*w)
        };
        write_artifact(cfg, &mut report, &name, &render_te_bars_svg(&group, &spec)?)?;
    }
    Ok(report)
}

/// Runs all stages and writes `manifest.json`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut all = StageReport::default();
    for stage in [ingest, score, aggregate, te, plot] {
        all.extend(stage(cfg)?);
    }
    let manifest = Manifest::build(&cfg.output_dir, &all.artifacts)?;
    let path = cfg.output_dir.join("manifest.json");
    fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(RunOutcome {
        manifest,
        warnings: all.warnings,
    })
}
