use std::io::{BufRead, Write};

use super::{score_lexicon, Lexicon, ScoreRequest};
use crate::emotion::EmotionVector;

#[derive(serde::Serialize)]
struct Scored<'a> {
    id: &'a str,
    scores: EmotionVector,
}

#[derive(serde::Serialize)]
struct Failed<'a> {
    id: &'a str,
    error: String,
}

/// Answers scoring requests with `lexicon`, one response line per request
/// line, until `input` ends.
///
/// A line that is not a valid request is answered with an `error` response;
/// if its id cannot be recovered the id is empty.
pub fn serve_lexicon<R: BufRead, W: Write>(
    input: R,
    mut output: W,
    lexicon: &Lexicon,
) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<ScoreRequest>(&line) {
            Ok(req) => serde_json::to_string(&Scored {
                id: &req.id,
                scores: score_lexicon(&req.text, lexicon),
            }),
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(|i| i.as_str()).map(str::to_owned))
                    .unwrap_or_default();
                serde_json::to_string(&Failed {
                    id: &id,
                    error: format!("bad request: {e}"),
                })
            }
        }
        .expect("responses serialize");
        writeln!(output, "{reply}")?;
        output.flush()?;
    }
    Ok(())
}
