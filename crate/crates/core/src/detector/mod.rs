//! Measurement detection: find numeric value + unit spans in a sentence,
//! classify how value and unit sit next to each other, parse the value, and
//! normalize the unit against a gazetteer.

mod gazetteer;

pub use gazetteer::{GazetteerError, NormalizedUnit, UnitGazetteer};

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::annotation::{Sentence, Token};
use crate::evaluation::LabeledSentence;

/// How the value and the first unit token are joined in the text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MeasurementFormat {
    /// "10 m" — whitespace between value and unit.
    SpaceBetween,
    /// "10m" / "10%" — no gap at all, possibly within one token.
    Attached,
    /// "10-m" — exactly one hyphen between value and unit.
    Hyphenated,
}

impl MeasurementFormat {
    pub const ALL: [MeasurementFormat; 3] = [
        MeasurementFormat::SpaceBetween,
        MeasurementFormat::Attached,
        MeasurementFormat::Hyphenated,
    ];

    /// The identifier used in rule files.
    pub fn key(self) -> &'static str {
        match self {
            MeasurementFormat::SpaceBetween => "space_between",
            MeasurementFormat::Attached => "attached",
            MeasurementFormat::Hyphenated => "hyphenated",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.key() == key)
    }
}

impl std::fmt::Display for MeasurementFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

/// A detected (or injected) measurement: value token + unit token span.
///
/// For attached measurements that occupy a single token ("10%" as one token),
/// the unit token list contains the combined token itself.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSpan {
    /// Token holding the numeric value (1-based).
    pub value_token_index: usize,
    /// Unit tokens, contiguous and non-empty.
    pub unit_token_indices: Vec<usize>,
    /// The numeric surface text, e.g. "1,900".
    pub raw_value: String,
    /// Numeric interpretation of `raw_value`.
    pub parsed_value: f64,
    /// The unit surface text, e.g. "nm" or "degrees Celsius".
    pub raw_unit_name: String,
    pub format: MeasurementFormat,
    pub value_offset_start: usize,
    pub value_offset_end: usize,
    pub unit_offset_start: usize,
    pub unit_offset_end: usize,
}

impl MeasurementSpan {
    /// Every token the span occupies (value + unit tokens).
    pub fn tokens(&self) -> HashSet<usize> {
        let mut tokens: HashSet<usize> = self.unit_token_indices.iter().copied().collect();
        tokens.insert(self.value_token_index);
        tokens
    }
}

/// Raised when a labeled measurement cannot be located in its sentence.
#[derive(Debug, Error)]
#[error("sentence {sentence_id}: cannot align labeled measurement {number:?} {unit:?} to the text")]
pub struct AlignmentError {
    pub sentence_id: i64,
    pub number: String,
    pub unit: String,
}

// Optional sign, digits with optional "," thousands groups, optional decimal
// part, optional exponent. Anchored at the start; the match is the longest
// numeric prefix.
static NUMBER_PREFIX: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^[+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?(?:[eE][+-]?\d+)?").unwrap()
});

/// The numeric prefix of `text`, if it starts with a number.
pub fn numeric_prefix(text: &str) -> Option<&str> {
    NUMBER_PREFIX.find(text).map(|m| m.as_str())
}

/// Parses a numeric surface form ("." decimal separator, "," thousands).
pub fn parse_number(raw: &str) -> Option<f64> {
    if numeric_prefix(raw) != Some(raw) {
        return None;
    }
    raw.replace(',', "").parse::<f64>().ok()
}

/// Classifies the text between a value and its unit.
///
/// Empty → attached, exactly "-" → hyphenated, all whitespace (non-empty) →
/// space_between. Anything else means the pair is not a measurement.
pub fn classify_gap(gap: &str) -> Option<MeasurementFormat> {
    if gap.is_empty() {
        Some(MeasurementFormat::Attached)
    } else if gap == "-" {
        Some(MeasurementFormat::Hyphenated)
    } else if gap.chars().all(char::is_whitespace) {
        Some(MeasurementFormat::SpaceBetween)
    } else {
        None
    }
}

/// Classifies the format for a value token and the first unit token.
///
/// When both are the same token the measurement is attached; otherwise the
/// verbatim text between them decides (see [`classify_gap`]).
pub fn classify_format(
    sentence: &Sentence,
    value: &Token,
    unit_first: &Token,
) -> Option<MeasurementFormat> {
    if value.index == unit_first.index {
        return Some(MeasurementFormat::Attached);
    }
    let gap = sentence
        .text
        .get(value.offset_end..unit_first.offset_start)?;
    classify_gap(gap)
}

/// One detection candidate for a given value token.
struct Candidate {
    span: MeasurementSpan,
}

impl Candidate {
    fn unit_surface_len(&self) -> usize {
        self.span.raw_unit_name.len()
    }
}

/// Finds measurement spans in a sentence.
///
/// A span is a numeric token (or numeric token prefix) plus a gazetteer unit
/// that follows it attached, hyphenated, or across whitespace. Overlapping
/// candidates are resolved by preferring the longest unit surface form, and
/// the returned spans never overlap.
pub fn detect_measurements(sentence: &Sentence, gazetteer: &UnitGazetteer) -> Vec<MeasurementSpan> {
    let mut spans: Vec<MeasurementSpan> = Vec::new();
    let mut consumed: HashSet<usize> = HashSet::new();
    for token in &sentence.tokens {
        if consumed.contains(&token.index) {
            continue;
        }
        let Some(raw_value) = numeric_prefix(&token.text) else {
            continue;
        };
        let Some(parsed_value) = parse_number(raw_value) else {
            continue;
        };
        let mut candidates: Vec<Candidate> = Vec::new();
        if raw_value.len() < token.text.len() {
            same_token_candidates(
                sentence,
                token,
                raw_value,
                parsed_value,
                gazetteer,
                &mut candidates,
            );
        } else {
            next_token_candidates(
                sentence,
                token,
                parsed_value,
                gazetteer,
                &consumed,
                &mut candidates,
            );
        }
        let Some(best) = candidates
            .into_iter()
            .max_by(|a, b| a.unit_surface_len().cmp(&b.unit_surface_len()))
        else {
            continue;
        };
        consumed.extend(best.span.tokens());
        spans.push(best.span);
    }
    spans
}

/// Candidates where value and unit share one token: "10%", "10m", "10-m".
fn same_token_candidates(
    _sentence: &Sentence,
    token: &Token,
    raw_value: &str,
    parsed_value: f64,
    gazetteer: &UnitGazetteer,
    candidates: &mut Vec<Candidate>,
) {
    let rest = &token.text[raw_value.len()..];
    let value_offset_end = token.offset_start + raw_value.len();
    let mut push = |unit: &str, format: MeasurementFormat, unit_offset_start: usize| {
        if gazetteer.lookup(unit).is_some() {
            candidates.push(Candidate {
                span: MeasurementSpan {
                    value_token_index: token.index,
                    unit_token_indices: vec![token.index],
                    raw_value: raw_value.to_string(),
                    parsed_value,
                    raw_unit_name: unit.to_string(),
                    format,
                    value_offset_start: token.offset_start,
                    value_offset_end,
                    unit_offset_start,
                    unit_offset_end: token.offset_end,
                },
            });
        }
    };
    push(rest, MeasurementFormat::Attached, value_offset_end);
    if let Some(after_hyphen) = rest.strip_prefix('-') {
        push(
            after_hyphen,
            MeasurementFormat::Hyphenated,
            value_offset_end + 1,
        );
    }
}

/// Candidates where the unit starts at the next token or, when the next
/// token is a bare hyphen, the one after it ("10 - m" never qualifies, but
/// "10 -" + "m" with a "-" gap does).
fn next_token_candidates(
    sentence: &Sentence,
    value: &Token,
    parsed_value: f64,
    gazetteer: &UnitGazetteer,
    consumed: &HashSet<usize>,
    candidates: &mut Vec<Candidate>,
) {
    for unit_start_index in [value.index + 1, value.index + 2] {
        let Some(unit_first) = sentence.token(unit_start_index) else {
            continue;
        };
        let Some(gap) = sentence.text.get(value.offset_end..unit_first.offset_start) else {
            continue;
        };
        let Some(format) = classify_gap(gap) else {
            continue;
        };
        // Longest unit surface wins: try multi-token surfaces first.
        for surface_tokens in (1..=gazetteer.max_surface_words()).rev() {
            let unit_end_index = unit_start_index + surface_tokens - 1;
            let Some(unit_last) = sentence.token(unit_end_index) else {
                continue;
            };
            if (unit_start_index..=unit_end_index).any(|i| consumed.contains(&i)) {
                continue;
            }
            let Some(surface) = sentence
                .text
                .get(unit_first.offset_start..unit_last.offset_end)
            else {
                continue;
            };
            if gazetteer.lookup(surface).is_none() {
                continue;
            }
            candidates.push(Candidate {
                span: MeasurementSpan {
                    value_token_index: value.index,
                    unit_token_indices: (unit_start_index..=unit_end_index).collect(),
                    raw_value: value.text.clone(),
                    parsed_value,
                    raw_unit_name: surface.to_string(),
                    format,
                    value_offset_start: value.offset_start,
                    value_offset_end: value.offset_end,
                    unit_offset_start: unit_first.offset_start,
                    unit_offset_end: unit_last.offset_end,
                },
            });
            break;
        }
    }
}

/// Converts a span's value into base units.
///
/// Gazetteer miss → the value passes through unchanged under an "unknown"
/// unit named after the raw surface form.
pub fn normalize(span: &MeasurementSpan, gazetteer: &UnitGazetteer) -> (f64, NormalizedUnit) {
    match gazetteer.lookup(&span.raw_unit_name) {
        Some(unit) => (
            span.parsed_value * unit.factor_to_base + unit.offset_to_base,
            unit.clone(),
        ),
        None => (
            span.parsed_value,
            NormalizedUnit::unknown(&span.raw_unit_name),
        ),
    }
}

/// Builds measurement spans from ground-truth labels instead of running the
/// detector.
///
/// Each labeled (number, unit) pair is located in the sentence text at the
/// leftmost position not consumed by an earlier label, so duplicated
/// measurements resolve in textual order.
pub fn apply_override_spans(
    sentence: &Sentence,
    labeled: &LabeledSentence,
) -> Result<Vec<MeasurementSpan>, AlignmentError> {
    let mut spans = Vec::new();
    let mut consumed: HashSet<usize> = HashSet::new();
    for measurement in &labeled.measurements {
        let span = locate_labeled_span(sentence, &measurement.number, &measurement.unit, &consumed)
            .ok_or_else(|| AlignmentError {
                sentence_id: sentence.id,
                number: measurement.number.clone(),
                unit: measurement.unit.clone(),
            })?;
        consumed.extend(span.tokens());
        spans.push(span);
    }
    Ok(spans)
}

fn locate_labeled_span(
    sentence: &Sentence,
    number: &str,
    unit: &str,
    consumed: &HashSet<usize>,
) -> Option<MeasurementSpan> {
    let parsed_value = parse_number(number)?;
    for token in &sentence.tokens {
        if consumed.contains(&token.index) || !token.text.starts_with(number) {
            continue;
        }
        let rest = &token.text[number.len()..];
        let value_offset_end = token.offset_start + number.len();
        let base = MeasurementSpan {
            value_token_index: token.index,
            unit_token_indices: vec![token.index],
            raw_value: number.to_string(),
            parsed_value,
            raw_unit_name: unit.to_string(),
            format: MeasurementFormat::Attached,
            value_offset_start: token.offset_start,
            value_offset_end,
            unit_offset_start: value_offset_end,
            unit_offset_end: token.offset_end,
        };
        if rest == unit {
            return Some(base);
        }
        if rest.len() == unit.len() + 1 && rest.strip_prefix('-') == Some(unit) {
            return Some(MeasurementSpan {
                format: MeasurementFormat::Hyphenated,
                unit_offset_start: value_offset_end + 1,
                ..base
            });
        }
        if !rest.is_empty() {
            continue;
        }
        // Value is the whole token; search for the unit in following tokens.
        for unit_start_index in [token.index + 1, token.index + 2] {
            let Some(unit_first) = sentence.token(unit_start_index) else {
                continue;
            };
            if consumed.contains(&unit_start_index) {
                continue;
            }
            let Some(gap) = sentence.text.get(token.offset_end..unit_first.offset_start) else {
                continue;
            };
            let Some(format) = classify_gap(gap) else {
                continue;
            };
            // The unit may cover several tokens ("degrees Celsius").
            let mut unit_end_index = unit_start_index;
            loop {
                let unit_last = sentence.token(unit_end_index)?;
                let surface = sentence
                    .text
                    .get(unit_first.offset_start..unit_last.offset_end)?;
                if surface == unit {
                    if (unit_start_index..=unit_end_index).any(|i| consumed.contains(&i)) {
                        break;
                    }
                    return Some(MeasurementSpan {
                        value_token_index: token.index,
                        unit_token_indices: (unit_start_index..=unit_end_index).collect(),
                        raw_value: number.to_string(),
                        parsed_value,
                        raw_unit_name: unit.to_string(),
                        format,
                        value_offset_start: token.offset_start,
                        value_offset_end: token.offset_end,
                        unit_offset_start: unit_first.offset_start,
                        unit_offset_end: unit_last.offset_end,
                    });
                }
                if surface.len() >= unit.len() || sentence.token(unit_end_index + 1).is_none() {
                    break;
                }
                unit_end_index += 1;
            }
        }
    }
    None
}
