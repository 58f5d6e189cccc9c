//! Sentence annotations: tokens, POS tags, and dependency arcs.
//!
//! All token indices are 1-based; head index 0 is reserved for the root arc.
//! Character offsets are half-open `[start, end)` into the sentence text.

mod conllu;
mod json;
pub mod service;

pub use conllu::parse_conllu;
pub use json::{parse_annotation_json, to_annotation_json};

use thiserror::Error;

/// Errors raised while reading or validating annotated sentences.
#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("line {line}: {message}")]
    Conllu { line: usize, message: String },
    #[error("sentence {sentence_id}: missing required field `{field}`")]
    MissingField {
        sentence_id: String,
        field: &'static str,
    },
    #[error("sentence {sentence_id}: {message}")]
    Invalid {
        sentence_id: String,
        message: String,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A single token of a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position within the sentence.
    pub index: usize,
    /// Surface text.
    pub text: String,
    /// Part-of-speech tag (Penn Treebank style, e.g. `NN`, `VBD`).
    pub pos: String,
    /// Character offset of the first character, inclusive.
    pub offset_start: usize,
    /// Character offset one past the last character, exclusive.
    pub offset_end: usize,
    /// Lemma, when the annotator provides one.
    pub lemma: Option<String>,
}

/// A labeled dependency between two tokens.
///
/// `raw_label` keeps the label as annotated (`"nmod:of"`); `base_type` and
/// `connector` hold the result of splitting an enhanced label on its first
/// colon (`"nmod"` / `Some("of")`). Plain labels have no connector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyArc {
    /// Head token index; 0 designates the sentence root.
    pub head: usize,
    /// Dependent token index (always ≥ 1).
    pub dependent: usize,
    /// Label exactly as annotated.
    pub raw_label: String,
    /// Label up to the first colon.
    pub base_type: String,
    /// Enhancement word after the first colon, if any.
    pub connector: Option<String>,
}

impl DependencyArc {
    /// Builds an arc, splitting an enhanced label into base type + connector.
    pub fn new(head: usize, dependent: usize, raw_label: &str) -> Self {
        let (base_type, connector) = split_label(raw_label);
        DependencyArc {
            head,
            dependent,
            raw_label: raw_label.to_string(),
            base_type: base_type.to_string(),
            connector: connector.map(str::to_string),
        }
    }
}

/// Splits a dependency label on its first colon.
///
/// `"nmod:of"` → `("nmod", Some("of"))`, `"nmod:such_as"` →
/// `("nmod", Some("such_as"))`, `"dobj"` → `("dobj", None)`.
pub fn split_label(raw_label: &str) -> (&str, Option<&str>) {
    match raw_label.split_once(':') {
        Some((base, connector)) => (base, Some(connector)),
        None => (raw_label, None),
    }
}

/// One annotated sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    /// Sentence number; unique within a document.
    pub id: i64,
    /// The original sentence text. Token offsets index into this string.
    pub text: String,
    pub tokens: Vec<Token>,
    pub arcs: Vec<DependencyArc>,
}

impl Sentence {
    /// Looks a token up by its 1-based index.
    pub fn token(&self, index: usize) -> Option<&Token> {
        if index == 0 || index > self.tokens.len() {
            return None;
        }
        let token = &self.tokens[index - 1];
        debug_assert_eq!(token.index, index);
        Some(token)
    }

    /// Text of the token at `index`, or `""` when out of range.
    pub fn token_text(&self, index: usize) -> &str {
        self.token(index).map_or("", |t| t.text.as_str())
    }

    /// POS tag of the token at `index`, or `""` when out of range.
    pub fn token_pos(&self, index: usize) -> &str {
        self.token(index).map_or("", |t| t.pos.as_str())
    }

    /// Checks structural invariants, returning the first violation found.
    ///
    /// Hard errors: non-contiguous token indices, overlapping or reversed
    /// offsets, offsets outside the text, token text not matching the slice
    /// it points at, arcs referencing out-of-range tokens, and root arcs
    /// carrying a connector. A token that never appears as a dependent only
    /// produces a warning so sentence fragments still pass.
    pub fn validate(&self) -> Result<(), AnnotationError> {
        let id = self.id.to_string();
        let invalid = |message: String| AnnotationError::Invalid {
            sentence_id: id.clone(),
            message,
        };
        let mut previous_end = 0usize;
        for (position, token) in self.tokens.iter().enumerate() {
            if token.index != position + 1 {
                return Err(invalid(format!(
                    "token at position {} has index {}, expected {}",
                    position,
                    token.index,
                    position + 1
                )));
            }
            if token.offset_end <= token.offset_start {
                return Err(invalid(format!(
                    "token {} has empty or reversed offsets {}..{}",
                    token.index, token.offset_start, token.offset_end
                )));
            }
            if position > 0 && token.offset_start < previous_end {
                return Err(invalid(format!(
                    "token {} overlaps the previous token",
                    token.index
                )));
            }
            previous_end = token.offset_end;
            match self.text.get(token.offset_start..token.offset_end) {
                Some(slice) if slice == token.text => {}
                Some(slice) => {
                    return Err(invalid(format!(
                        "token {} text {:?} does not match sentence slice {:?}",
                        token.index, token.text, slice
                    )));
                }
                None => {
                    return Err(invalid(format!(
                        "token {} offsets {}..{} fall outside the sentence text",
                        token.index, token.offset_start, token.offset_end
                    )));
                }
            }
        }
        let n = self.tokens.len();
        for arc in &self.arcs {
            if arc.dependent == 0 || arc.dependent > n {
                return Err(invalid(format!(
                    "arc {}->{} has out-of-range dependent",
                    arc.head, arc.dependent
                )));
            }
            if arc.head > n {
                return Err(invalid(format!(
                    "arc {}->{} has out-of-range head",
                    arc.head, arc.dependent
                )));
            }
            if arc.head == 0 && arc.connector.is_some() {
                return Err(invalid(format!(
                    "root arc to token {} carries label {:?} with a connector",
                    arc.dependent, arc.raw_label
                )));
            }
        }
        let mut attached = vec![false; n + 1];
        for arc in &self.arcs {
            attached[arc.dependent] = true;
        }
        for token in &self.tokens {
            if !attached[token.index] {
                log::warn!(
                    "sentence {}: token {} ({:?}) is not attached to any head",
                    self.id,
                    token.index,
                    token.text
                );
            }
        }
        Ok(())
    }
}
