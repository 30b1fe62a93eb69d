//! Host side of the scorer plugin protocol.
//!
//! The scorer is a child process speaking newline-delimited JSON over its
//! standard streams. Each request is `{"id":"..","text":".."}`; each
//! response is `{"id":"..","scores":{"fear":f,...,"trust":f}}` or
//! `{"id":"..","error":".."}`. Responses may come back in any order. The
//! host closes the child's stdin to signal end of input; the child then
//! flushes and exits 0.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::ScoredDocument;
use crate::corpus::Document;
use crate::emotion::EmotionVector;
use crate::error::{Error, Result};

/// Response sums inside this band are renormalized silently.
pub const RENORMALIZE_BAND: (f64, f64) = (0.99, 1.01);

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ScoreRequest {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ScoreResponse {
    pub id: String,
    #[serde(default)]
    pub scores: Option<serde_json::Value>,
    #[serde(default)]
    pub error: Option<String>,
}

/// Command line of the scorer process and how long to wait for the next
/// response before giving up on the outstanding documents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalScorer {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl ExternalScorer {
    /// `argv[0]` is the program.
    pub fn from_argv(argv: &[String]) -> Result<Self> {
        let (program, args) = argv
            .split_first()
            .ok_or_else(|| Error::Config("external scorer command is empty".into()))?;
        Ok(ExternalScorer {
            program: program.clone(),
            args: args.to_vec(),
            timeout: DEFAULT_TIMEOUT,
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureKind {
    /// No response before the idle timeout or before the scorer closed
    /// its output.
    Missing,
    /// The response broke the protocol contract (negative or missing
    /// scores, non-finite values, zero mass).
    ProtocolViolation(String),
    /// The scorer reported an error for this request.
    ScorerError(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentFailure {
    pub id: String,
    pub kind: FailureKind,
}

#[derive(Debug, Clone, Default)]
pub struct ExternalOutcome {
    /// One entry per input document, in input order.
    pub results: Vec<std::result::Result<ScoredDocument, DocumentFailure>>,
    pub warnings: Vec<String>,
}

impl ExternalOutcome {
    pub fn scored(&self) -> impl Iterator<Item = &ScoredDocument> {
        self.results.iter().filter_map(|r| r.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &DocumentFailure> {
        self.results.iter().filter_map(|r| r.as_ref().err())
    }
}

fn check_scores(
    value: serde_json::Value,
) -> std::result::Result<(EmotionVector, Option<String>), String> {
    let raw: EmotionVector = serde_json::from_value(value).map_err(|e| e.to_string())?;
    if let Some(c) = raw.0.iter().find(|c| !c.is_finite()) {
        return Err(format!("non-finite score {c}"));
    }
    if let Some(c) = raw.0.iter().find(|c| **c < 0.0) {
        return Err(format!("negative score {c}"));
    }
    let sum = raw.sum();
    if sum <= 0.0 {
        return Err("scores sum to zero".into());
    }
    if !sum.is_finite() {
        return Err("scores overflow when summed".into());
    }
    let normalized = EmotionVector(raw.0.map(|c| c / sum));
    let warning = if (RENORMALIZE_BAND.0..=RENORMALIZE_BAND.1).contains(&sum) {
        None
    } else {
        Some(format!("scores summed to {sum}; normalized"))
    };
    Ok((normalized, warning))
}

/// Sends one request per document to a freshly spawned scorer and
/// collects the responses into input order.
///
/// Per-document problems (missing response, protocol violation, scorer
/// error) are recorded in the outcome. A scorer that exits unsuccessfully
/// before answering everything aborts the whole call.
pub fn score_external(docs: &[Document], scorer: &ExternalScorer) -> Result<ExternalOutcome> {
    let mut pending: HashMap<&str, usize> = HashMap::with_capacity(docs.len());
    for (i, d) in docs.iter().enumerate() {
        if pending.insert(d.id.as_str(), i).is_some() {
            return Err(Error::Validation(format!(
                "duplicate document id {:?} sent to external scorer",
                d.id
            )));
        }
    }
    if docs.is_empty() {
        return Ok(ExternalOutcome::default());
    }

    let mut child = Command::new(&scorer.program)
        .args(&scorer.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| Error::Scorer(format!("failed to start {:?}: {e}", scorer.program)))?;

    let stdin = child.stdin.take().expect("stdin piped");
    let stdout = child.stdout.take().expect("stdout piped");

    let requests: Vec<ScoreRequest> = docs
        .iter()
        .map(|d| ScoreRequest {
            id: d.id.clone(),
            text: d.text.clone(),
        })
        .collect();
    let writer = thread::spawn(move || -> std::io::Result<()> {
        let mut w = BufWriter::new(stdin);
        for req in &requests {
            serde_json::to_writer(&mut w, req)?;
            w.write_all(b"\n")?;
        }
        w.flush()
        // dropping `w` closes the scorer's stdin
    });

    let (tx, rx) = mpsc::channel::<std::io::Result<String>>();
    thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            let stop = line.is_err();
            if tx.send(line).is_err() || stop {
                break;
            }
        }
    });

    let mut slots: Vec<Option<std::result::Result<ScoredDocument, DocumentFailure>>> =
        vec![None; docs.len()];
    let mut warnings = Vec::new();
    let mut answered = 0usize;
    let mut timed_out = false;

    while answered < docs.len() {
        let line = match rx.recv_timeout(scorer.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => {
                warnings.push(format!("reading scorer output: {e}"));
                break;
            }
            Err(mpsc::RecvTimeoutError::Timeout) => {
                timed_out = true;
                break;
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => break,
        };
        if line.trim().is_empty() {
            continue;
        }
        let resp: ScoreResponse = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                warnings.push(format!("unparseable scorer output {line:?}: {e}"));
                continue;
            }
        };
        let Some(&index) = pending.get(resp.id.as_str()) else {
            warnings.push(format!("response for unknown id {:?}", resp.id));
            continue;
        };
        if slots[index].is_some() {
            warnings.push(format!("duplicate response for id {:?} ignored", resp.id));
            continue;
        }
        let doc = &docs[index];
        let failure = |kind| DocumentFailure {
            id: doc.id.clone(),
            kind,
        };
        let result = match (resp.error, resp.scores) {
            (Some(msg), _) => Err(failure(FailureKind::ScorerError(msg))),
            (None, None) => Err(failure(FailureKind::ProtocolViolation(
                "response has neither scores nor error".into(),
            ))),
            (None, Some(value)) => match check_scores(value) {
                Ok((v, warning)) => {
                    if let Some(w) = warning {
                        warnings.push(format!("id {:?}: {w}", doc.id));
                    }
                    Ok(ScoredDocument::new(doc, v))
                }
                Err(msg) => Err(failure(FailureKind::ProtocolViolation(msg))),
            },
        };
        slots[index] = Some(result);
        answered += 1;
    }

    if timed_out {
        let _ = child.kill();
        warnings.push(format!(
            "scorer idle for {:?}; {} documents without response",
            scorer.timeout,
            docs.len() - answered
        ));
    }
    let status = child
        .wait()
        .map_err(|e| Error::Scorer(format!("waiting for scorer: {e}")))?;
    if let Ok(Err(e)) = writer.join() {
        if answered < docs.len() && !timed_out {
            warnings.push(format!("writing requests: {e}"));
        }
    }
    if !timed_out && !status.success() {
        return Err(Error::ScorerAborted {
            status: status.to_string(),
            completed: answered,
            total: docs.len(),
        });
    }

    let results = slots
        .into_iter()
        .zip(docs)
        .map(|(slot, doc)| {
            slot.unwrap_or_else(|| {
                Err(DocumentFailure {
                    id: doc.id.clone(),
                    kind: FailureKind::Missing,
                })
            })
        })
        .collect();
    Ok(ExternalOutcome { results, warnings })
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use crate::corpus::Channel;
    use crate::emotion::{validate_simplex, Emotion};

    const EXTRACT_ID: &str = r#"sed 's/^{"id":"\([^"]*\)".*/\1/'"#;

    fn sh(script: &str) -> ExternalScorer {
        ExternalScorer {
            program: "sh".into(),
            args: vec!["-c".into(), script.into()],
            timeout: Duration::from_secs(10),
        }
    }

    fn docs(ids: &[&str]) -> Vec<Document> {
        ids.iter()
            .enumerate()
            .map(|(i, id)| Document {
                id: id.to_string(),
                timestamp: i as i64,
                channel: Channel::Social,
                text: format!("text {i}"),
            })
            .collect()
    }

    fn responder(scores: &str) -> String {
        format!(
            r#"while IFS= read -r line; do id=$(printf '%s' "$line" | {EXTRACT_ID}); printf '{{"id":"%s","scores":{scores}}}\n' "$id"; done"#
        )
    }

    #[test]
    fn exact_scores_pass_through() {
        let scores = r#"{"fear":0.5,"sadness":0.25,"surprise":0.125,"anticipation":0.125,"joy":0,"anger":0,"disgust":0,"trust":0}"#;
        let out = score_external(&docs(&["a", "b", "c"]), &sh(&responder(scores))).unwrap();
        assert!(out.warnings.is_empty(), "{:?}", out.warnings);
        let scored: Vec<_> = out.scored().collect();
        assert_eq!(scored.len(), 3);
        assert_eq!(
            scored[0].emotion.0,
            [0.5, 0.25, 0.125, 0.125, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            scored.iter().map(|s| s.id.as_str()).collect::<Vec<_>>(),
            ["a", "b", "c"]
        );
    }

    #[test]
    fn uniform_response() {
        let scores = r#"{"fear":0.125,"sadness":0.125,"surprise":0.125,"anticipation":0.125,"joy":0.125,"anger":0.125,"disgust":0.125,"trust":0.125}"#;
        let out = score_external(&docs(&["a"]), &sh(&responder(scores))).unwrap();
        assert_eq!(
            out.scored().next().unwrap().emotion,
            EmotionVector::uniform()
        );
    }

    #[test]
    fn out_of_band_sum_is_normalized_with_warning() {
        let scores = r#"{"fear":2,"sadness":2,"surprise":0,"anticipation":0,"joy":0,"anger":0,"disgust":0,"trust":0}"#;
        let out = score_external(&docs(&["a"]), &sh(&responder(scores))).unwrap();
        let v = out.scored().next().unwrap().emotion;
        assert!(validate_simplex(&v));
        assert_eq!(v.get(Emotion::Fear), 0.5);
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn in_band_sum_is_renormalized_silently() {
        let scores = r#"{"fear":0.3,"sadness":0.3,"surprise":0.3,"anticipation":0.105,"joy":0,"anger":0,"disgust":0,"trust":0}"#;
        let out = score_external(&docs(&["a"]), &sh(&responder(scores))).unwrap();
        assert!(out.warnings.is_empty());
        assert!(validate_simplex(&out.scored().next().unwrap().emotion));
    }

    #[test]
    fn negative_component_is_a_violation_for_that_document_only() {
        let good = r#"{"fear":1,"sadness":0,"surprise":0,"anticipation":0,"joy":0,"anger":0,"disgust":0,"trust":0}"#;
        let bad = r#"{"fear":1.1,"sadness":-0.1,"surprise":0,"anticipation":0,"joy":0,"anger":0,"disgust":0,"trust":0}"#;
        let script = format!(
            r#"while IFS= read -r line; do id=$(printf '%s' "$line" | {EXTRACT_ID}); if [ "$id" = bad ]; then s='{bad}'; else s='{good}'; fi; printf '{{"id":"%s","scores":%s}}\n' "$id" "$s"; done"#
        );
        let out = score_external(&docs(&["a", "bad", "c"]), &sh(&script)).unwrap();
        assert!(out.results[0].is_ok());
        assert!(out.results[2].is_ok());
        let failure = out.results[1].as_ref().unwrap_err();
        assert_eq!(failure.id, "bad");
        assert!(matches!(failure.kind, FailureKind::ProtocolViolation(_)));
    }

    #[test]
    fn out_of_order_responses_are_reassembled() {
        let script = format!(
            r#"ids=$({EXTRACT_ID}); for id in $(printf '%s\n' "$ids" | tac); do printf '{{"id":"%s","scores":{{"fear":0,"sadness":0,"surprise":0,"anticipation":0,"joy":1,"anger":0,"disgust":0,"trust":%s}}}}\n' "$id" "$id"; done"#
        );
        let out = score_external(&docs(&["1", "2", "3", "4"]), &sh(&script)).unwrap();
        let trust: Vec<f64> = out
            .scored()
            .map(|s| s.emotion.get(Emotion::Trust) * (1.0 + s.id.parse::<f64>().unwrap()))
            .collect();
        for (i, t) in trust.iter().enumerate() {
            assert!((t - (i + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn scorer_error_and_missing_responses() {
        let script =
            r#"read -r a; read -r b; cat >/dev/null; printf '{"id":"a","error":"boom"}\n'"#;
        let out = score_external(&docs(&["a", "b"]), &sh(script)).unwrap();
        assert_eq!(
            out.results[0].as_ref().unwrap_err().kind,
            FailureKind::ScorerError("boom".into())
        );
        assert_eq!(
            out.results[1].as_ref().unwrap_err().kind,
            FailureKind::Missing
        );
    }

    #[test]
    fn timeout_marks_remaining_missing() {
        let script = r#"read -r a; printf '{"id":"a","scores":{"fear":1,"sadness":0,"surprise":0,"anticipation":0,"joy":0,"anger":0,"disgust":0,"trust":0}}\n'; exec sleep 30"#;
        let scorer = sh(script).with_timeout(Duration::from_millis(300));
        let out = score_external(&docs(&["a", "b"]), &scorer).unwrap();
        assert!(out.results[0].is_ok());
        assert_eq!(
            out.results[1].as_ref().unwrap_err().kind,
            FailureKind::Missing
        );
        assert!(out.warnings.iter().any(|w| w.contains("idle")));
    }

    #[test]
    fn crash_aborts_with_partial_report() {
        let script = r#"read -r a; printf '{"id":"a","scores":{"fear":1,"sadness":0,"surprise":0,"anticipation":0,"joy":0,"anger":0,"disgust":0,"trust":0}}\n'; exit 3"#;
        let err = score_external(&docs(&["a", "b", "c"]), &sh(script)).unwrap_err();
        match err {
            Error::ScorerAborted {
                completed, total, ..
            } => {
                assert_eq!((completed, total), (1, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_program_is_an_error() {
        let scorer = ExternalScorer::from_argv(&["/nonexistent/scorer".into()]).unwrap();
        assert!(score_external(&docs(&["a"]), &scorer).is_err());
        assert!(ExternalScorer::from_argv(&[]).is_err());
    }

    #[test]
    fn duplicate_ids_rejected_before_spawn() {
        assert!(score_external(&docs(&["a", "a"]), &sh("cat")).is_err());
    }
}
