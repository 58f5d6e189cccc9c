//! Scoring harness: labeled data loading, per-measurement confusion counts,
//! and per-source metric aggregation.
//!
//! Labels arrive as JSON (an array or JSON Lines) of per-sentence objects.
//! Each measurement carries the expected related entities; entity names are
//! matched against extracted related words case-insensitively, with compound
//! descriptors folded in so multiword names like "cutleaf teasal" can match
//! a head word plus its compound modifier.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::matcher::RelatedWord;

/// Errors raised while loading or validating labeled data.
#[derive(Debug, Error)]
pub enum EvalError {
    /// The input was not parseable as JSON at all.
    #[error("labels are not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    /// The JSON parsed but does not follow the labeled-sentence schema.
    #[error("invalid labels ({context}): {message}")]
    Schema { context: String, message: String },
}

fn schema_error(context: impl Into<String>, message: impl Into<String>) -> EvalError {
    EvalError::Schema {
        context: context.into(),
        message: message.into(),
    }
}

/// One expected related entity for a measurement, e.g. `{"formalin": ["buffered"]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledEntity {
    /// Surface form of the entity as it occurs in the sentence.
    pub name: String,
    /// Expected descriptor strings. Not used for scoring.
    pub descriptors: Vec<String>,
}

/// One expected measurement with its related entities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMeasurement {
    /// The number as written in the sentence, e.g. `"10"`.
    pub number: String,
    /// The unit surface form, e.g. `"%"`.
    pub unit: String,
    /// Expected related entities in label order.
    pub related: Vec<LabeledEntity>,
}

/// Ground-truth annotations for one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub sentence_num: i64,
    pub sentence: String,
    pub measurements: Vec<LabeledMeasurement>,
}

/// Parse labeled data from a JSON array or JSON Lines text.
pub fn load_labels(input: &str) -> Result<Vec<LabeledSentence>, EvalError> {
    let trimmed = input.trim_start();
    let values: Vec<Value> = if trimmed.starts_with('[') {
        serde_json::from_str(input)?
    } else {
        let mut rows = Vec::new();
        for line in input.lines() {
            if line.trim().is_empty() {
                continue;
            }
            rows.push(serde_json::from_str(line)?);
        }
        rows
    };
    values
        .iter()
        .enumerate()
        .map(|(pos, value)| parse_labeled_sentence(value, pos))
        .collect()
}

fn parse_labeled_sentence(value: &Value, position: usize) -> Result<LabeledSentence, EvalError> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema_error(format!("entry #{position}"), "expected a JSON object"))?;
    // Use the sentence number to identify the entry in errors when we have it.
    let context = match obj.get("sentence_num").and_then(Value::as_i64) {
        Some(num) => format!("sentence_num {num}"),
        None => format!("entry #{position}"),
    };
    let sentence_num = obj
        .get("sentence_num")
        .ok_or_else(|| schema_error(&context, "missing `sentence_num`"))?
        .as_i64()
        .ok_or_else(|| schema_error(&context, "`sentence_num` must be an integer"))?;
    let sentence = obj
        .get("sentence")
        .ok_or_else(|| schema_error(&context, "missing `sentence`"))?
        .as_str()
        .ok_or_else(|| schema_error(&context, "`sentence` must be a string"))?
        .to_string();
    let measurements = obj
        .get("measurements")
        .ok_or_else(|| schema_error(&context, "missing `measurements`"))?
        .as_array()
        .ok_or_else(|| schema_error(&context, "`measurements` must be an array"))?
        .iter()
        .map(|m| parse_labeled_measurement(m, &context))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LabeledSentence {
        sentence_num,
        sentence,
        measurements,
    })
}

fn parse_labeled_measurement(
    value: &Value,
    context: &str,
) -> Result<LabeledMeasurement, EvalError> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema_error(context, "each measurement must be an object"))?;
    let number = match obj.get("number") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(_) => return Err(schema_error(context, "`number` must be a string")),
        None => return Err(schema_error(context, "measurement missing `number`")),
    };
    let unit = obj
        .get("unit")
        .ok_or_else(|| schema_error(context, "measurement missing `unit`"))?
        .as_str()
        .ok_or_else(|| schema_error(context, "`unit` must be a string"))?
        .to_string();
    let mut related = Vec::new();
    if let Some(rel) = obj.get("related") {
        let entries = rel
            .as_array()
            .ok_or_else(|| schema_error(context, "`related` must be an array"))?;
        for entry in entries {
            let map = entry
                .as_object()
                .ok_or_else(|| schema_error(context, "each related entry must be an object"))?;
            for (name, descriptors) in map {
                if name.is_empty() {
                    return Err(schema_error(
                        context,
                        "related entity names must be non-empty",
                    ));
                }
                let descriptors = descriptors
                    .as_array()
                    .ok_or_else(|| {
                        schema_error(context, "related descriptors must be an array of strings")
                    })?
                    .iter()
                    .map(|d| {
                        d.as_str().map(str::to_string).ok_or_else(|| {
                            schema_error(context, "related descriptors must be strings")
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                related.push(LabeledEntity {
                    name: name.clone(),
                    descriptors,
                });
            }
        }
    }
    Ok(LabeledMeasurement {
        number,
        unit,
        related,
    })
}

/// True/false positive and false negative tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    #[serde(rename = "tp")]
    pub true_positives: u64,
    #[serde(rename = "fp")]
    pub false_positives: u64,
    #[serde(rename = "fn")]
    pub false_negatives: u64,
}

impl ConfusionCounts {
    pub fn new(true_positives: u64, false_positives: u64, false_negatives: u64) -> Self {
        Self {
            true_positives,
            false_positives,
            false_negatives,
        }
    }

    /// Add another tally into this one.
    pub fn absorb(&mut self, other: ConfusionCounts) {
        self.true_positives += other.true_positives;
        self.false_positives += other.false_positives;
        self.false_negatives += other.false_negatives;
    }
}

/// Precision/recall/F-score ratios; a ratio is `None` when its denominator is
/// zero rather than being reported as 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Metrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fscore: Option<f64>,
}

impl Metrics {
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        let tp = counts.true_positives as f64;
        let fp = counts.false_positives as f64;
        let fnc = counts.false_negatives as f64;
        let precision =
            (counts.true_positives + counts.false_positives > 0).then(|| tp / (tp + fp));
        let recall = (counts.true_positives + counts.false_negatives > 0).then(|| tp / (tp + fnc));
        let fscore = (2 * counts.true_positives + counts.false_positives + counts.false_negatives
            > 0)
        .then(|| 2.0 * tp / (2.0 * tp + fp + fnc));
        Self {
            precision,
            recall,
            fscore,
        }
    }
}

/// Counts plus derived metrics for one source tag.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SourceMetrics {
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
}

impl SourceMetrics {
    fn from_counts(counts: ConfusionCounts) -> Self {
        Self {
            counts,
            metrics: Metrics::from_counts(counts),
        }
    }
}

/// Per-source and overall evaluation results.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub sources: BTreeMap<String, SourceMetrics>,
    pub overall: SourceMetrics,
}

/// Score one measurement: greedy one-to-one matching of labeled entities
/// against extracted related words.
///
/// A labeled entity matches a related word when, ignoring case, it equals the
/// extracted raw name or the raw name joined with its compound descriptors in
/// token order. Labels are consumed in order, each taking the first unmatched
/// extraction.
pub fn score_sentence(extracted: &[RelatedWord], labeled: &[LabeledEntity]) -> ConfusionCounts {
    let candidates: Vec<Vec<String>> = extracted.iter().map(candidate_names).collect();
    let mut used = vec![false; extracted.len()];
    let mut true_positives = 0u64;
    for entity in labeled {
        let target = entity.name.to_lowercase();
        if let Some(hit) =
            (0..extracted.len()).find(|&i| !used[i] && candidates[i].contains(&target))
        {
            used[hit] = true;
            true_positives += 1;
        }
    }
    let false_positives = used.iter().filter(|&&u| !u).count() as u64;
    let false_negatives = labeled.len() as u64 - true_positives;
    ConfusionCounts::new(true_positives, false_positives, false_negatives)
}

/// Lower-cased strings under which an extracted related word can be matched:
/// the raw name itself, and (when compound descriptors are present) the
/// compound parts plus raw name joined in token order.
fn candidate_names(word: &RelatedWord) -> Vec<String> {
    let mut names = vec![word.raw_name.to_lowercase()];
    let mut parts: Vec<(usize, &str)> = word
        .descriptors
        .iter()
        .filter(|d| d.relation == "compound")
        .map(|d| (d.token_index, d.raw_name.as_str()))
        .collect();
    if !parts.is_empty() {
        parts.push((word.token_index, word.raw_name.as_str()));
        parts.sort_by_key(|(index, _)| *index);
        let joined = parts
            .iter()
            .map(|(_, name)| *name)
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase();
        names.push(joined);
    }
    names
}

/// Sum counts per source tag and overall, and derive metrics for each row.
pub fn aggregate(counts: &[(String, ConfusionCounts)]) -> MetricsReport {
    let mut per_source: BTreeMap<String, ConfusionCounts> = BTreeMap::new();
    let mut overall = ConfusionCounts::default();
    for (tag, c) in counts {
        per_source.entry(tag.clone()).or_default().absorb(*c);
        overall.absorb(*c);
    }
    MetricsReport {
        sources: per_source
            .into_iter()
            .map(|(tag, c)| (tag, SourceMetrics::from_counts(c)))
            .collect(),
        overall: SourceMetrics::from_counts(overall),
    }
}

fn percent_cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.1}%", v * 100.0),
        None => "-".to_string(),
    }
}

/// Render the report as an aligned text table with one-decimal percentages.
pub fn render_table(report: &MetricsReport) -> String {
    let mut rows: Vec<(String, SourceMetrics)> = report
        .sources
        .iter()
        .map(|(tag, m)| (tag.clone(), *m))
        .collect();
    rows.push(("overall".to_string(), report.overall));
    let name_width = rows
        .iter()
        .map(|(tag, _)| tag.len())
        .chain(["source".len()])
        .max()
        .unwrap_or(6);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_width$}  {:>6}  {:>6}  {:>6}  {:>9}  {:>7}  {:>7}",
        "source", "tp", "fp", "fn", "precision", "recall", "f-score"
    );
    for (tag, m) in rows {
        let _ = writeln!(
            out,
            "{:<name_width$}  {:>6}  {:>6}  {:>6}  {:>9}  {:>7}  {:>7}",
            tag,
            m.counts.true_positives,
            m.counts.false_positives,
            m.counts.false_negatives,
            percent_cell(m.metrics.precision),
            percent_cell(m.metrics.recall),
            percent_cell(m.metrics.fscore),
        );
    }
    out
}
