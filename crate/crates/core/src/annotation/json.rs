//! Annotation-service JSON: the wire format produced by the HTTP annotation
//! endpoint and accepted by `--format annotation-json`.
//!
//! ```json
//! {"sentences": [{
//!     "id": 1,
//!     "text": "…",
//!     "tokens": [{"index": 1, "text": "…", "pos": "NN",
//!                 "offsetStart": 0, "offsetEnd": 3, "lemma": "…"}],
//!     "deps": [{"head": 0, "dependent": 2, "label": "root"}]
//! }]}
//! ```

use serde::{Deserialize, Serialize};

use super::{AnnotationError, DependencyArc, Sentence, Token};

#[derive(Deserialize)]
struct RawDocument {
    sentences: Option<Vec<RawSentence>>,
}

#[derive(Deserialize)]
struct RawSentence {
    id: Option<i64>,
    text: Option<String>,
    tokens: Option<Vec<RawToken>>,
    deps: Option<Vec<RawDep>>,
}

#[derive(Deserialize)]
struct RawToken {
    index: Option<usize>,
    text: Option<String>,
    pos: Option<String>,
    #[serde(rename = "offsetStart")]
    offset_start: Option<usize>,
    #[serde(rename = "offsetEnd")]
    offset_end: Option<usize>,
    lemma: Option<String>,
}

#[derive(Deserialize)]
struct RawDep {
    head: Option<usize>,
    dependent: Option<usize>,
    label: Option<String>,
}

fn require<T>(
    value: Option<T>,
    sentence_id: &str,
    field: &'static str,
) -> Result<T, AnnotationError> {
    value.ok_or_else(|| AnnotationError::MissingField {
        sentence_id: sentence_id.to_string(),
        field,
    })
}

/// Parses annotation-service JSON into validated sentences.
pub fn parse_annotation_json(input: &str) -> Result<Vec<Sentence>, AnnotationError> {
    let document: RawDocument = serde_json::from_str(input)?;
    let raw_sentences = require(document.sentences, "(document)", "sentences")?;
    let mut sentences = Vec::with_capacity(raw_sentences.len());
    for (position, raw) in raw_sentences.into_iter().enumerate() {
        // For error messages, fall back to the 1-based position when the
        // sentence has no id of its own.
        let label = raw
            .id
            .map(|id| id.to_string())
            .unwrap_or_else(|| format!("#{}", position + 1));
        let id = require(raw.id, &label, "id")?;
        let text = require(raw.text, &label, "text")?;
        let raw_tokens = require(raw.tokens, &label, "tokens")?;
        let raw_deps = require(raw.deps, &label, "deps")?;
        let mut tokens = Vec::with_capacity(raw_tokens.len());
        for raw_token in raw_tokens {
            tokens.push(Token {
                index: require(raw_token.index, &label, "tokens[].index")?,
                text: require(raw_token.text, &label, "tokens[].text")?,
                pos: require(raw_token.pos, &label, "tokens[].pos")?,
                offset_start: require(raw_token.offset_start, &label, "tokens[].offsetStart")?,
                offset_end: require(raw_token.offset_end, &label, "tokens[].offsetEnd")?,
                lemma: raw_token.lemma,
            });
        }
        let mut arcs = Vec::with_capacity(raw_deps.len());
        for raw_dep in raw_deps {
            arcs.push(DependencyArc::new(
                require(raw_dep.head, &label, "deps[].head")?,
                require(raw_dep.dependent, &label, "deps[].dependent")?,
                &require(raw_dep.label, &label, "deps[].label")?,
            ));
        }
        let sentence = Sentence {
            id,
            text,
            tokens,
            arcs,
        };
        sentence.validate()?;
        sentences.push(sentence);
    }
    Ok(sentences)
}

#[derive(Serialize)]
struct OutToken<'a> {
    index: usize,
    text: &'a str,
    pos: &'a str,
    #[serde(rename = "offsetStart")]
    offset_start: usize,
    #[serde(rename = "offsetEnd")]
    offset_end: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    lemma: Option<&'a str>,
}

#[derive(Serialize)]
struct OutDep<'a> {
    head: usize,
    dependent: usize,
    label: &'a str,
}

#[derive(Serialize)]
struct OutSentence<'a> {
    id: i64,
    text: &'a str,
    tokens: Vec<OutToken<'a>>,
    deps: Vec<OutDep<'a>>,
}

/// Serializes sentences back to annotation-service JSON.
///
/// Output round-trips: `parse_annotation_json(&to_annotation_json(s)) == s`.
pub fn to_annotation_json(sentences: &[Sentence]) -> String {
    let document = serde_json::json!({
        "sentences": sentences
            .iter()
            .map(|sentence| OutSentence {
                id: sentence.id,
                text: &sentence.text,
                tokens: sentence
                    .tokens
                    .iter()
                    .map(|token| OutToken {
                        index: token.index,
                        text: &token.text,
                        pos: &token.pos,
                        offset_start: token.offset_start,
                        offset_end: token.offset_end,
                        lemma: token.lemma.as_deref(),
                    })
                    .collect::<Vec<_>>(),
                deps: sentence
                    .arcs
                    .iter()
                    .map(|arc| OutDep {
                        head: arc.head,
                        dependent: arc.dependent,
                        label: &arc.raw_label,
                    })
                    .collect::<Vec<_>>(),
            })
            .map(|sentence| serde_json::to_value(sentence).expect("sentence serialization"))
            .collect::<Vec<_>>(),
    });
    serde_json::to_string(&document).expect("document serialization")
}
