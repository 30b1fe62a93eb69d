//! Emotion dynamics across two media channels.
//!
//! The crate scores timestamped documents from a `social` and a `news`
//! channel on Plutchik's eight basic emotions, turns the scores into daily
//! and smoothed time series, finds dominance crossovers between emotions,
//! and measures directional coupling between the channels with a plug-in
//! transfer entropy estimator over equal-width binned series.
//!
//! Stages:
//!
//! 1. [`corpus`]: JSONL ingestion, keyword/interval filtering, dedup.
//! 2. [`scoring`]: lexicon scorer and the external scorer plugin protocol.
//! 3. [`timeseries`]: daily aggregation, rolling means, crossovers.
//! 4. [`infoflow`]: binning, joint counts, transfer entropy, surrogates.
//! 5. [`report`]: CSV/JSON exports and SVG plots.
//! 6. [`pipeline`]: config-driven orchestration with a content-hash manifest.
//!
//! [`synth`] generates coupled synthetic corpora for testing the whole chain.

#![forbid(unsafe_code)]

pub mod corpus;
pub mod emotion;
pub mod error;
pub mod infoflow;
pub mod pipeline;
pub mod report;
pub mod scoring;
pub mod synth;
pub mod timeseries;

pub use corpus::{Channel, CorpusConfig, Document};
pub use emotion::{Emotion, EmotionVector};
pub use error::{Error, Result};
