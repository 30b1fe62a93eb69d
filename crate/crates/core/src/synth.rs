//! Synthetic two-channel corpora with a known coupling direction.
//!
//! Each channel has a latent daily emotion mixture. The leading channel
//! draws a fresh mixture every day around a slow trend in which fear
//! dominates early and anticipation late; the following channel repeats
//! the leader's mixture from `lag` days earlier. Documents are short texts
//! whose emotion words are sampled from their channel's mixture of the
//! day, so scoring them with [`default_lexicon`] recovers the mixture up
//! to sampling noise.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{Channel, CorpusConfig, Document};
use crate::emotion::{Emotion, N_EMOTIONS};
use crate::error::{Error, Result};
use crate::infoflow::DayWindow;
use crate::scoring::Lexicon;
use crate::timeseries::EmotionRow;

/// Emotion words of the bundled lexicon, by canonical emotion index.
pub const EMOTION_WORDS: [[&str; 2]; N_EMOTIONS] = [
    ["afraid", "panic"],
    ["sad", "gloomy"],
    ["shocked", "unexpected"],
    ["hope", "expect"],
    ["happy", "glad"],
    ["angry", "furious"],
    ["gross", "disgusting"],
    ["reliable", "trust"],
];

const FILLER: [&str; 10] = [
    "store", "price", "today", "shelf", "bag", "market", "supply", "harvest", "news", "family",
];

const KEYWORDS: [&str; 2] = ["rice shortage", "shortage of rice"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    SocialLeads,
    NewsLeads,
    /// Social leads before `switch_day` (0-based), news leads from then on.
    Reversal {
        switch_day: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub interval_start: DateTime<Utc>,
    pub days: usize,
    pub tz_offset_minutes: i32,
    pub social_docs_per_day: usize,
    pub news_docs_per_day: usize,
    pub words_per_doc: usize,
    pub lag: usize,
    pub coupling: Coupling,
    /// Standard deviation of the daily log-weight innovations.
    pub innovation: f64,
    /// Adds off-topic, duplicate and out-of-interval documents that the
    /// ingest filter is expected to drop.
    pub noise_documents: bool,
    pub seed: u64,
}

impl SynthConfig {
    /// Two months from 2024-08-01 (UTC+9), social leading news by 3 days.
    pub fn two_months(seed: u64) -> Self {
        SynthConfig {
            interval_start: DateTime::parse_from_rfc3339("2024-08-01T00:00:00+09:00")
                .expect("static timestamp")
                .with_timezone(&Utc),
            days: 61,
            tz_offset_minutes: 540,
            social_docs_per_day: 120,
            news_docs_per_day: 60,
            words_per_doc: 8,
            lag: 3,
            coupling: Coupling::SocialLeads,
            innovation: 0.45,
            noise_documents: true,
            seed,
        }
    }

    /// Four months from 2024-08-01 with the coupling flipping halfway.
    pub fn reversal(seed: u64) -> Self {
        SynthConfig {
            days: 122,
            lag: 1,
            coupling: Coupling::Reversal { switch_day: 61 },
            ..SynthConfig::two_months(seed)
        }
    }

    /// Day windows on either side of the coupling switch, or one window
    /// over the whole interval when the coupling never changes.
    pub fn phase_windows(&self) -> Vec<DayWindow> {
        let corpus = self.corpus_config();
        let (first, last) = (corpus.first_day(), corpus.last_day());
        match self.coupling {
            Coupling::Reversal { switch_day } if switch_day > 0 && switch_day < self.days => {
                let switch = first + chrono::Duration::days(switch_day as i64);
                vec![
                    DayWindow::new(first, switch - chrono::Duration::days(1)),
                    DayWindow::new(switch, last),
                ]
            }
            _ => vec![DayWindow::new(first, last)],
        }
    }

    pub fn interval_end(&self) -> DateTime<Utc> {
        self.interval_start + chrono::Duration::days(self.days as i64)
    }

    pub fn corpus_config(&self) -> CorpusConfig {
        CorpusConfig {
            keywords: KEYWORDS.iter().map(|k| k.to_string()).collect(),
            interval_start: self.interval_start,
            interval_end: self.interval_end(),
            tz_offset_minutes: self.tz_offset_minutes,
            dedup: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.days <= self.lag || self.lag == 0 {
            return Err(Error::Config(format!(
                "synthetic corpus needs 0 < lag < days, got lag {} over {} days",
                self.lag, self.days
            )));
        }
        if let Coupling::Reversal { switch_day } = self.coupling {
            if switch_day == 0 || switch_day >= self.days {
                return Err(Error::Config(format!(
                    "switch day {switch_day} outside the span"
                )));
            }
        }
        if self.words_per_doc == 0 || self.social_docs_per_day == 0 || self.news_docs_per_day == 0 {
            return Err(Error::Config(
                "synthetic corpus needs documents and words".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub social: Vec<Document>,
    pub news: Vec<Document>,
    /// Latent daily mixtures per channel.
    pub social_states: Vec<EmotionRow>,
    pub news_states: Vec<EmotionRow>,
}

/// One-hot lexicon over [`EMOTION_WORDS`].
pub fn default_lexicon() -> Lexicon {
    let mut entries = HashMap::new();
    for e in Emotion::ALL {
        for word in EMOTION_WORDS[e.index()] {
            let mut w = [0.0; N_EMOTIONS];
            w[e.index()] = 1.0;
            entries.insert(word.to_string(), w);
        }
    }
    Lexicon::new(entries, Lexicon::DEFAULT_SMOOTHING).expect("static lexicon is valid")
}

fn trend(day: usize, days: usize) -> EmotionRow {
    let t = day as f64 / (days - 1).max(1) as f64;
    let mut w = [0.8; N_EMOTIONS];
    w[Emotion::Fear.index()] = 2.2 - 1.8 * t;
    w[Emotion::Anticipation.index()] = 0.4 + 1.8 * t;
    w[Emotion::Anger.index()] = 1.2 - 0.6 * t;
    w[Emotion::Joy.index()] = 0.5 + 0.5 * t;
    w
}

fn fresh_state(rng: &mut ChaCha8Rng, noise: &Normal<f64>, base: EmotionRow) -> EmotionRow {
    let w = base.map(|b| b * noise.sample(rng).exp());
    let sum: f64 = w.iter().sum();
    w.map(|v| v / sum)
}

fn volume(base: usize, day: usize, peak: f64) -> usize {
    let z = (day as f64 - peak) / 10.0;
    ((base as f64) * (0.6 + 0.8 * (-z * z).exp())).round() as usize
}

/// Deterministic for a given config.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise =
        Normal::new(0.0, cfg.innovation).map_err(|e| Error::Config(format!("innovation: {e}")))?;

    let n = cfg.days;
    let mut social = vec![[0.0; N_EMOTIONS]; n];
    let mut news = vec![[0.0; N_EMOTIONS]; n];
    for t in 0..n {
        let social_leads = match cfg.coupling {
            Coupling::SocialLeads => true,
            Coupling::NewsLeads => false,
            Coupling::Reversal { switch_day } => t < switch_day,
        };
        let base = trend(t, n);
        let (leader, follower) = if social_leads {
            (&mut social, &mut news)
        } else {
            (&mut news, &mut social)
        };
        leader[t] = fresh_state(&mut rng, &noise, base);
        follower[t] = if t >= cfg.lag {
            leader[t - cfg.lag]
        } else {
            fresh_state(&mut rng, &noise, trend(0, n))
        };
    }

    let peak = n as f64 * 0.4;
    let social_docs = documents(
        &mut rng,
        cfg,
        Channel::Social,
        &social,
        cfg.social_docs_per_day,
        peak,
    )?;
    let news_docs = documents(
        &mut rng,
        cfg,
        Channel::News,
        &news,
        cfg.news_docs_per_day,
        peak + cfg.lag as f64,
    )?;
    Ok(SynthCorpus {
        social: social_docs,
        news: news_docs,
        social_states: social,
        news_states: news,
    })
}

fn documents(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    channel: Channel,
    states: &[EmotionRow],
    per_day: usize,
    peak: f64,
) -> Result<Vec<Document>> {
    let prefix = match channel {
        Channel::Social => "s",
        Channel::News => "n",
    };
    let start = cfg.interval_start.timestamp();
    let mut docs = Vec::new();
    let mut next_id = 0usize;
    let mut push = |docs: &mut Vec<Document>, timestamp: i64, text: String| {
        docs.push(Document {
            id: format!("{prefix}-{next_id:06}"),
            timestamp,
            channel,
            text,
        });
        next_id += 1;
    };

    for (day, state) in states.iter().enumerate() {
        let pick = WeightedIndex::new(state).map_err(|e| Error::Config(format!("state: {e}")))?;
        let day_start = start + day as i64 * 86_400;
        for _ in 0..volume(per_day, day, peak) {
            let mut words: Vec<&str> = Vec::with_capacity(cfg.words_per_doc + 4);
            for _ in 0..cfg.words_per_doc {
                let e = pick.sample(rng);
                words.push(EMOTION_WORDS[e].choose(rng).expect("two words"));
            }
            for _ in 0..3 {
                words.push(FILLER.choose(rng).expect("filler"));
            }
            let keyword = KEYWORDS.choose(rng).expect("keyword");
            let text = format!("{keyword}: {}.", words.join(" "));
            let ts = day_start + rng.random_range(0..86_400);
            push(&mut docs, ts, text);

            if cfg.noise_documents && rng.random_bool(0.02) {
                let dup = docs.last().expect("just pushed").text.clone();
                push(&mut docs, ts + 60, dup);
            }
            if cfg.noise_documents && rng.random_bool(0.03) {
                let off_topic = format!(
                    "{} {} {}",
                    FILLER.choose(rng).unwrap(),
                    FILLER.choose(rng).unwrap(),
                    EMOTION_WORDS[0][0]
                );
                push(&mut docs, ts + 30, off_topic);
            }
        }
    }
    if cfg.noise_documents {
        let end = start + cfg.days as i64 * 86_400;
        push(
            &mut docs,
            start - 3_600,
            "rice shortage: afraid panic before the window".into(),
        );
        push(
            &mut docs,
            end,
            "rice shortage: hope after the window".into(),
        );
    }
    Ok(docs)
}

/// Writes `social.jsonl`, `news.jsonl`, `lexicon.json` and `config.json`
/// into `dir` and returns the path of `config.json`.
pub fn write_fixture(dir: &Path, cfg: &SynthConfig, te_windows: &[DayWindow]) -> Result<PathBuf> {
    let corpus = generate(cfg)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, body: String| {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(|e| Error::io(&p, e))
    };
    let jsonl = |docs: &[Document]| {
        docs.iter()
            .map(|d| serde_json::to_string(d).expect("document serializes") + "\n")
            .collect::<String>()
    };
    write("social.jsonl", jsonl(&corpus.social))?;
    write("news.jsonl", jsonl(&corpus.news))?;
    write("lexicon.json", default_lexicon().to_json() + "\n")?;

    let corpus_cfg = cfg.corpus_config();
    let config = serde_json::json!({
        "social": "social.jsonl",
        "news": "news.jsonl",
        "scorer": { "lexicon": "lexicon.json" },
        "corpus": corpus_cfg,
        "window": 7,
        "binning": { "n_bins": 3 },
        "lag": cfg.lag,
        "te_windows": te_windows,
        "significance": { "enabled": true, "n_surrogates": 99, "seed": cfg.seed },
        "crossover": { "a": "fear", "b": "anticipation" },
        "output_dir": "out",
    });
    let path = dir.join("config.json");
    write(
        "config.json",
        serde_json::to_string_pretty(&config).expect("json") + "\n",
    )?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::filter_corpus;

    #[test]
    fn phase_windows_split_at_switch() {
        let w = SynthConfig::reversal(1).phase_windows();
        assert_eq!(w.len(), 2);
        assert_eq!(w[0].start.to_string(), "2024-08-01");
        assert_eq!(w[0].end.to_string(), "2024-09-30");
        assert_eq!(w[1].start.to_string(), "2024-10-01");
        assert_eq!(w[1].end.to_string(), "2024-11-30");
        assert_eq!(SynthConfig::two_months(1).phase_windows().len(), 1);
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig {
            days: 20,
            ..SynthConfig::two_months(5)
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.social, b.social);
        assert_eq!(a.news, b.news);
    }

    #[test]
    fn follower_repeats_leader() {
        let cfg = SynthConfig {
            days: 30,
            ..SynthConfig::two_months(1)
        };
        let c = generate(&cfg).unwrap();
        for t in cfg.lag..cfg.days {
            assert_eq!(c.news_states[t], c.social_states[t - cfg.lag]);
        }
        let rev = SynthConfig {
            days: 30,
            coupling: Coupling::Reversal { switch_day: 15 },
            ..SynthConfig::two_months(1)
        };
        let c = generate(&rev).unwrap();
        assert_eq!(c.news_states[10], c.social_states[10 - rev.lag]);
        assert_eq!(c.social_states[20], c.news_states[20 - rev.lag]);
    }

    #[test]
    fn noise_documents_are_filtered() {
        let cfg = SynthConfig {
            days: 10,
            ..SynthConfig::two_months(2)
        };
        let c = generate(&cfg).unwrap();
        let kept = filter_corpus(&c.social, &cfg.corpus_config());
        assert!(kept.len() < c.social.len());
        let clean = generate(&SynthConfig {
            noise_documents: false,
            ..cfg.clone()
        })
        .unwrap();
        assert!(clean
            .social
            .iter()
            .all(|d| cfg.corpus_config().contains(d.timestamp)));
    }

    #[test]
    fn lexicon_covers_every_emotion() {
        let lex = default_lexicon();
        assert_eq!(lex.len(), 16);
        for e in Emotion::ALL {
            for w in EMOTION_WORDS[e.index()] {
                assert_eq!(lex.weights(w).unwrap()[e.index()], 1.0);
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(generate(&SynthConfig {
            lag: 0,
            ..SynthConfig::two_months(0)
        })
        .is_err());
        assert!(generate(&SynthConfig {
            days: 3,
            ..SynthConfig::two_months(0)
        })
        .is_err());
    }
}
