use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;

use crate::emotion::{EmotionVector, N_EMOTIONS};
use crate::error::{Error, Result};

static TOKEN_SPLIT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[\s\p{P}]+").expect("static pattern"));

/// Token to per-emotion weights, plus the additive smoothing mass spread
/// uniformly over the eight emotions.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    entries: HashMap<String, [f64; N_EMOTIONS]>,
    smoothing_mass: f64,
}

impl Lexicon {
    pub const DEFAULT_SMOOTHING: f64 = 1.0;

    pub fn new(entries: HashMap<String, [f64; N_EMOTIONS]>, smoothing_mass: f64) -> Result<Self> {
        if !smoothing_mass.is_finite() || smoothing_mass <= 0.0 {
            return Err(Error::Validation(format!(
                "lexicon smoothing mass must be positive, got {smoothing_mass}"
            )));
        }
        for (token, weights) in &entries {
            if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::Validation(format!(
                    "lexicon entry {token:?} has a negative or non-finite weight"
                )));
            }
        }
        if !entries.values().flatten().any(|w| *w > 0.0) {
            return Err(Error::Validation(
                "lexicon needs at least one positive weight".into(),
            ));
        }
        Ok(Lexicon {
            entries,
            smoothing_mass,
        })
    }

    /// Parses the JSON object form `{"token": [w0, ..., w7], ...}` with
    /// weights in canonical emotion order.
    pub fn from_json(json: &str, smoothing_mass: f64) -> Result<Self> {
        let entries: HashMap<String, [f64; N_EMOTIONS]> =
            serde_json::from_str(json).map_err(|e| Error::Validation(format!("lexicon: {e}")))?;
        Lexicon::new(entries, smoothing_mass)
    }

    /// JSON form with tokens sorted, for stable files.
    pub fn to_json(&self) -> String {
        let sorted: std::collections::BTreeMap<_, _> = self.entries.iter().collect();
        serde_json::to_string_pretty(&sorted).expect("lexicon serializes")
    }

    pub fn weights(&self, token: &str) -> Option<&[f64; N_EMOTIONS]> {
        self.entries.get(token)
    }

    pub fn smoothing_mass(&self) -> f64 {
        self.smoothing_mass
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Splits on whitespace and Unicode punctuation. No case folding, no stemming.
pub fn tokenize(text: &str) -> impl Iterator<Item = &str> {
    TOKEN_SPLIT.split(text).filter(|t| !t.is_empty())
}

/// Sum of matched token weights (every occurrence counts) plus
/// `smoothing_mass / 8` per emotion, normalized to sum 1.
pub fn score_lexicon(text: &str, lex: &Lexicon) -> EmotionVector {
    let mut raw = [lex.smoothing_mass / N_EMOTIONS as f64; N_EMOTIONS];
    for token in tokenize(text) {
        if let Some(w) = lex.entries.get(token) {
            for (r, w) in raw.iter_mut().zip(w) {
                *r += w;
            }
        }
    }
    EmotionVector::normalized(raw).expect("smoothing keeps the sum positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::{validate_simplex, Emotion};
    use proptest::prelude::*;

    fn afraid_lexicon() -> Lexicon {
        let mut entries = HashMap::new();
        entries.insert(
            "afraid".to_string(),
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        );
        Lexicon::new(entries, 1.0).unwrap()
    }

    #[test]
    fn single_match() {
        let v = score_lexicon("afraid", &afraid_lexicon());
        assert!((v.get(Emotion::Fear) - 0.5625).abs() < 1e-15);
        for e in &Emotion::ALL[1..] {
            assert!((v.get(*e) - 0.0625).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_text_is_uniform() {
        let v = score_lexicon("", &afraid_lexicon());
        assert_eq!(v, EmotionVector::uniform());
        let v = score_lexicon("nothing matches here", &afraid_lexicon());
        assert_eq!(v, EmotionVector::uniform());
    }

    #[test]
    fn repeated_occurrences_count() {
        let v = score_lexicon("afraid afraid", &afraid_lexicon());
        assert!((v.get(Emotion::Fear) - 2.125 / 3.0).abs() < 1e-12);
        assert!((v.get(Emotion::Trust) - 0.125 / 3.0).abs() < 1e-12);
        assert!((v.get(Emotion::Fear) - 0.70833).abs() < 1e-5);
    }

    #[test]
    fn punctuation_splits_tokens() {
        let toks: Vec<_> = tokenize("afraid,afraid!  (afraid)「afraid」 afraid's").collect();
        assert_eq!(
            toks,
            ["afraid", "afraid", "afraid", "afraid", "afraid", "s"]
        );
        let v = score_lexicon("afraid,afraid!", &afraid_lexicon());
        assert!((v.get(Emotion::Fear) - 2.125 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_lexicons() {
        assert!(Lexicon::new(HashMap::new(), 1.0).is_err());
        let mut entries = HashMap::new();
        entries.insert("x".to_string(), [0.0; 8]);
        assert!(Lexicon::new(entries.clone(), 1.0).is_err());
        entries.insert("y".to_string(), [-1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(Lexicon::new(entries, 1.0).is_err());
        let mut ok = HashMap::new();
        ok.insert("x".to_string(), [1.0; 8]);
        assert!(Lexicon::new(ok.clone(), 0.0).is_err());
        assert!(Lexicon::new(ok, f64::NAN).is_err());
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"afraid":[1,0,0,0,0,0,0,0],"hope":[0,0,0,1,0,0,0,0.5]}"#;
        let lex = Lexicon::from_json(json, 1.0).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(Lexicon::from_json(&lex.to_json(), 1.0).unwrap(), lex);
        assert!(Lexicon::from_json(r#"{"a":[1,0]}"#, 1.0).is_err());
    }

    fn arb_entries() -> impl Strategy<Value = Vec<(String, [f64; 8])>> {
        prop::collection::vec(
            (
                prop::sample::select(vec!["a", "b", "c", "d", "e", "f", "g", "h"]),
                prop::array::uniform8(0.0f64..5.0),
            ),
            1..8,
        )
        .prop_map(|v| {
            let mut seen = std::collections::HashSet::new();
            v.into_iter()
                .filter(|(k, _)| seen.insert(*k))
                .map(|(k, mut w)| {
                    w[0] += 0.1;
                    (k.to_string(), w)
                })
                .collect()
        })
    }

    fn arb_text() -> impl Strategy<Value = String> {
        prop::collection::vec(
            prop::sample::select(vec!["a", "b", "c", "d", "x", "y", "!", ",", " ", "。"]),
            0..30,
        )
        .prop_map(|parts| parts.join(" "))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn output_is_on_simplex(entries in arb_entries(), text in arb_text(), m in 0.01f64..10.0) {
            let lex = Lexicon::new(entries.into_iter().collect(), m).unwrap();
            prop_assert!(validate_simplex(&score_lexicon(&text, &lex)));
        }

        #[test]
        fn insertion_order_is_irrelevant(entries in arb_entries(), text in arb_text()) {
            let forward = Lexicon::new(entries.iter().cloned().collect(), 1.0).unwrap();
            let reversed = Lexicon::new(entries.iter().rev().cloned().collect(), 1.0).unwrap();
            prop_assert_eq!(score_lexicon(&text, &forward), score_lexicon(&text, &reversed));
        }

        #[test]
        fn doubling_weights_and_mass_is_invariant(entries in arb_entries(), text in arb_text(), m in 0.01f64..10.0) {
            let base = Lexicon::new(entries.iter().cloned().collect(), m).unwrap();
            let doubled = Lexicon::new(
                entries.iter().map(|(k, w)| (k.clone(), w.map(|x| 2.0 * x))).collect(),
                2.0 * m,
            ).unwrap();
            let a = score_lexicon(&text, &base);
            let b = score_lexicon(&text, &doubled);
            for (x, y) in a.0.iter().zip(b.0.iter()) {
                prop_assert!((x - y).abs() <= 1e-15);
            }
        }
    }
}
