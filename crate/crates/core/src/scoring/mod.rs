//! Document scorers. Every scorer maps a document onto the emotion simplex.

mod external;
mod lexicon;
mod serve;

pub use external::{
    score_external, DocumentFailure, ExternalOutcome, ExternalScorer, FailureKind, ScoreRequest,
    ScoreResponse, DEFAULT_TIMEOUT, RENORMALIZE_BAND,
};
pub use lexicon::{score_lexicon, tokenize, Lexicon};
pub use serve::serve_lexicon;

use serde::{Deserialize, Serialize};

use crate::corpus::{Channel, Document};
use crate::emotion::EmotionVector;

/// Scores for one retained document, keyed by `(channel, id)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDocument {
    pub id: String,
    pub channel: Channel,
    pub timestamp: i64,
    #[serde(rename = "scores")]
    pub emotion: EmotionVector,
}

impl ScoredDocument {
    pub fn new(doc: &Document, emotion: EmotionVector) -> Self {
        ScoredDocument {
            id: doc.id.clone(),
            channel: doc.channel,
            timestamp: doc.timestamp,
            emotion,
        }
    }
}

/// Scores every document with the lexicon scorer, preserving order.
pub fn score_all_lexicon(docs: &[Document], lexicon: &Lexicon) -> Vec<ScoredDocument> {
    use rayon::prelude::*;
    docs.par_iter()
        .map(|d| ScoredDocument::new(d, score_lexicon(&d.text, lexicon)))
        .collect()
}
