//! Plutchik's eight basic emotions and points on the emotion simplex.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

/// Tolerance on the component sum of a simplex point.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Number of emotion dimensions.
pub const N_EMOTIONS: usize = 8;

/// The eight basic emotions in canonical order. The discriminant is the
/// index into every score array in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Emotion {
    Fear = 0,
    Sadness = 1,
    Surprise = 2,
    Anticipation = 3,
    Joy = 4,
    Anger = 5,
    Disgust = 6,
    Trust = 7,
}

impl Emotion {
    pub const ALL: [Emotion; N_EMOTIONS] = [
        Emotion::Fear,
        Emotion::Sadness,
        Emotion::Surprise,
        Emotion::Anticipation,
        Emotion::Joy,
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Trust,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Emotion> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Fear => "fear",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
            Emotion::Anticipation => "anticipation",
            Emotion::Joy => "joy",
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Trust => "trust",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownEmotion(pub String);

impl fmt::Display for UnknownEmotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown emotion {:?}", self.0)
    }
}

impl std::error::Error for UnknownEmotion {}

impl FromStr for Emotion {
    type Err = UnknownEmotion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Emotion::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| UnknownEmotion(s.to_string()))
    }
}

impl Serialize for Emotion {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Emotion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Scores over the eight emotions in canonical order.
///
/// Values built through [`EmotionVector::normalized`] or checked with
/// [`validate_simplex`] lie on the probability simplex. The raw
/// constructor does not enforce it so that protocol code can inspect
/// out-of-contract payloads before rejecting them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmotionVector(pub [f64; N_EMOTIONS]);

impl EmotionVector {
    pub fn uniform() -> Self {
        EmotionVector([1.0 / N_EMOTIONS as f64; N_EMOTIONS])
    }

    /// One-hot vector at `emotion`.
    pub fn vertex(emotion: Emotion) -> Self {
        let mut v = [0.0; N_EMOTIONS];
        v[emotion.index()] = 1.0;
        EmotionVector(v)
    }

    /// Divides by the component sum. Returns `None` for a non-positive or
    /// non-finite sum, or any negative or non-finite component.
    pub fn normalized(raw: [f64; N_EMOTIONS]) -> Option<Self> {
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return None;
        }
        let sum: f64 = raw.iter().sum();
        if !sum.is_finite() || sum <= 0.0 {
            return None;
        }
        Some(EmotionVector(raw.map(|v| v / sum)))
    }

    pub fn get(&self, emotion: Emotion) -> f64 {
        self.0[emotion.index()]
    }

    pub fn as_array(&self) -> &[f64; N_EMOTIONS] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_simplex(&self) -> bool {
        validate_simplex(self)
    }
}

/// True iff every component lies in `[0, 1]` and the components sum to 1
/// within [`SIMPLEX_TOLERANCE`].
pub fn validate_simplex(v: &EmotionVector) -> bool {
    v.0.iter().all(|c| (0.0..=1.0).contains(c)) && (v.sum() - 1.0).abs() <= SIMPLEX_TOLERANCE
}

// Serialized as an object keyed by emotion name, the shape used by the
// scorer protocol and the scored JSONL artifacts.
impl Serialize for EmotionVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(N_EMOTIONS))?;
        for e in Emotion::ALL {
            map.serialize_entry(e.name(), &self.0[e.index()])?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for EmotionVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ScoresVisitor;

        impl<'de> Visitor<'de> for ScoresVisitor {
            type Value = EmotionVector;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object with one number per emotion")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut scores = [None; N_EMOTIONS];
                while let Some(key) = access.next_key::<String>()? {
                    match key.parse::<Emotion>() {
                        Ok(e) => {
                            if scores[e.index()].is_some() {
                                return Err(de::Error::custom(format!("duplicate emotion {key}")));
                            }
                            scores[e.index()] = Some(access.next_value::<f64>()?);
                        }
                        Err(_) => {
                            access.next_value::<de::IgnoredAny>()?;
                        }
                    }
                }
                let mut out = [0.0; N_EMOTIONS];
                for e in Emotion::ALL {
                    out[e.index()] = scores[e.index()]
                        .ok_or_else(|| de::Error::custom(format!("missing emotion {e}")))?;
                }
                Ok(EmotionVector(out))
            }
        }

        deserializer.deserialize_map(ScoresVisitor)
    }
}
