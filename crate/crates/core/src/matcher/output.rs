//! JSON rendering of extractions and parsing of previously written output.
//!
//! The serialized layout (field names, nesting, key order, string-typed
//! descriptor token indices) is pinned by golden tests; consumers parse this
//! format back, so any change here is a format break.

use serde::{Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use super::{Descriptor, Extraction, RelatedWord};

/// Emits whole numbers without a decimal point ("10", not "10.0").
struct JsonNumber(f64);

impl Serialize for JsonNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let value = self.0;
        // Only collapse to an integer when it is exactly representable.
        if value.fract() == 0.0 && value.abs() < 9.007_199_254_740_992e15 {
            serializer.serialize_i64(value as i64)
        } else {
            serializer.serialize_f64(value)
        }
    }
}

/// Render a number the same way the extraction JSON does.
pub fn format_number(value: f64) -> String {
    serde_json::to_string(&JsonNumber(value)).expect("number serialization cannot fail")
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct DescriptorOut<'a> {
    raw_name: &'a str,
    token_index: String,
}

impl<'a> From<&'a Descriptor> for DescriptorOut<'a> {
    fn from(descriptor: &'a Descriptor) -> Self {
        Self {
            raw_name: &descriptor.raw_name,
            token_index: descriptor.token_index.to_string(),
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RawUnitOut<'a> {
    offset_start: usize,
    offset_end: usize,
    token_indices: Vec<String>,
    name: &'a str,
}

#[derive(Serialize)]
struct NormalizedUnitOut<'a> {
    #[serde(rename = "type")]
    unit_type: &'a str,
    name: &'a str,
    system: &'a str,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct QuantityOut<'a> {
    parsed_value: JsonNumber,
    normalized_quantity: JsonNumber,
    raw_value: &'a str,
    raw_unit: RawUnitOut<'a>,
    offset_end: usize,
    offset_start: usize,
    token_index: usize,
    normalized_unit: NormalizedUnitOut<'a>,
    #[serde(rename = "type")]
    quantity_type: &'a str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    descriptors: Vec<DescriptorOut<'a>>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RelatedOut<'a> {
    raw_name: &'a str,
    connector: &'a str,
    offset_end: usize,
    relation_form: &'a str,
    offset_start: usize,
    token_index: usize,
    descriptors: Vec<DescriptorOut<'a>>,
}

#[derive(Serialize)]
struct ExtractionOut<'a> {
    #[serde(rename = "type")]
    extraction_type: &'static str,
    quantity: QuantityOut<'a>,
    related: Vec<RelatedOut<'a>>,
}

fn extraction_out(extraction: &Extraction) -> ExtractionOut<'_> {
    let span = &extraction.span;
    ExtractionOut {
        extraction_type: "value",
        quantity: QuantityOut {
            parsed_value: JsonNumber(span.parsed_value),
            normalized_quantity: JsonNumber(extraction.normalized_quantity),
            raw_value: &span.raw_value,
            raw_unit: RawUnitOut {
                offset_start: span.unit_offset_start,
                offset_end: span.unit_offset_end,
                token_indices: span
                    .unit_token_indices
                    .iter()
                    .map(|index| index.to_string())
                    .collect(),
                name: &span.raw_unit_name,
            },
            offset_end: span.value_offset_end,
            offset_start: span.value_offset_start,
            token_index: span.value_token_index,
            normalized_unit: NormalizedUnitOut {
                unit_type: &extraction.normalized_unit.dimension,
                name: &extraction.normalized_unit.name,
                system: &extraction.normalized_unit.system,
            },
            quantity_type: &extraction.normalized_unit.dimension,
            descriptors: extraction.value_modifiers.iter().map(Into::into).collect(),
        },
        related: extraction
            .related
            .iter()
            .map(|word| RelatedOut {
                raw_name: &word.raw_name,
                connector: &word.connector,
                offset_end: word.offset_end,
                relation_form: &word.relation_form,
                offset_start: word.offset_start,
                token_index: word.token_index,
                descriptors: word.descriptors.iter().map(Into::into).collect(),
            })
            .collect(),
    }
}

/// Serialize one extraction as a compact JSON object.
pub fn serialize_extraction(extraction: &Extraction) -> String {
    serde_json::to_string(&extraction_out(extraction)).expect("serialization cannot fail")
}

#[derive(Serialize)]
struct SentenceOut<'a> {
    sentence_num: i64,
    sentence: &'a str,
    measurements: Vec<ExtractionOut<'a>>,
}

/// Serialize a sentence's extractions as one JSON Lines record.
pub fn serialize_sentence_line(
    sentence_num: i64,
    sentence: &str,
    extractions: &[Extraction],
) -> String {
    let out = SentenceOut {
        sentence_num,
        sentence,
        measurements: extractions.iter().map(extraction_out).collect(),
    };
    serde_json::to_string(&out).expect("serialization cannot fail")
}

/// Errors raised when reading previously written extraction output.
#[derive(Debug, Error)]
pub enum ExtractionParseError {
    #[error("extraction output line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("extraction output line {line}: {message}")]
    Schema { line: usize, message: String },
}

/// One sentence record read back from extraction output.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSentence {
    pub sentence_num: i64,
    pub sentence: String,
    pub measurements: Vec<ParsedMeasurement>,
}

/// One measurement read back from extraction output; carries just enough to
/// re-score and re-bin it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedMeasurement {
    pub raw_value: String,
    pub raw_unit_name: String,
    pub normalized_quantity: f64,
    pub dimension: String,
    pub related: Vec<RelatedWord>,
}

/// Parse JSON Lines previously produced by [`serialize_sentence_line`].
///
/// Serialized descriptors do not record which dependency produced them, so
/// re-parsed descriptors are treated as compounds for scoring purposes.
pub fn parse_extraction_lines(text: &str) -> Result<Vec<ParsedSentence>, ExtractionParseError> {
    let mut sentences = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(line).map_err(|source| ExtractionParseError::Json {
                line: line_no,
                source,
            })?;
        sentences.push(parse_sentence_value(&value, line_no)?);
    }
    Ok(sentences)
}

fn schema_error(line: usize, message: impl Into<String>) -> ExtractionParseError {
    ExtractionParseError::Schema {
        line,
        message: message.into(),
    }
}

fn parse_sentence_value(
    value: &Value,
    line: usize,
) -> Result<ParsedSentence, ExtractionParseError> {
    let sentence_num = value["sentence_num"]
        .as_i64()
        .ok_or_else(|| schema_error(line, "missing integer `sentence_num`"))?;
    let sentence = value["sentence"]
        .as_str()
        .ok_or_else(|| schema_error(line, "missing string `sentence`"))?
        .to_string();
    let measurements = value["measurements"]
        .as_array()
        .ok_or_else(|| schema_error(line, "missing array `measurements`"))?
        .iter()
        .map(|m| parse_measurement_value(m, line))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ParsedSentence {
        sentence_num,
        sentence,
        measurements,
    })
}

fn parse_measurement_value(
    value: &Value,
    line: usize,
) -> Result<ParsedMeasurement, ExtractionParseError> {
    let quantity = value
        .get("quantity")
        .ok_or_else(|| schema_error(line, "measurement missing `quantity`"))?;
    let raw_value = quantity["rawValue"]
        .as_str()
        .ok_or_else(|| schema_error(line, "quantity missing `rawValue`"))?
        .to_string();
    let raw_unit_name = quantity["rawUnit"]["name"]
        .as_str()
        .ok_or_else(|| schema_error(line, "quantity missing `rawUnit.name`"))?
        .to_string();
    let normalized_quantity = quantity["normalizedQuantity"]
        .as_f64()
        .ok_or_else(|| schema_error(line, "quantity missing `normalizedQuantity`"))?;
    let dimension = quantity["normalizedUnit"]["type"]
        .as_str()
        .ok_or_else(|| schema_error(line, "quantity missing `normalizedUnit.type`"))?
        .to_string();
    let related = value["related"]
        .as_array()
        .ok_or_else(|| schema_error(line, "measurement missing `related`"))?
        .iter()
        .map(|word| parse_related_value(word, line))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ParsedMeasurement {
        raw_value,
        raw_unit_name,
        normalized_quantity,
        dimension,
        related,
    })
}

fn parse_related_value(value: &Value, line: usize) -> Result<RelatedWord, ExtractionParseError> {
    let raw_name = value["rawName"]
        .as_str()
        .ok_or_else(|| schema_error(line, "related word missing `rawName`"))?
        .to_string();
    let token_index = value["tokenIndex"]
        .as_u64()
        .ok_or_else(|| schema_error(line, "related word missing `tokenIndex`"))?
        as usize;
    let descriptors = value["descriptors"]
        .as_array()
        .map(|entries| {
            entries
                .iter()
                .map(|d| parse_descriptor_value(d, line))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?
        .unwrap_or_default();
    Ok(RelatedWord {
        raw_name,
        token_index,
        offset_start: value["offsetStart"].as_u64().unwrap_or_default() as usize,
        offset_end: value["offsetEnd"].as_u64().unwrap_or_default() as usize,
        relation_form: value["relationForm"]
            .as_str()
            .unwrap_or_default()
            .to_string(),
        connector: value["connector"].as_str().unwrap_or_default().to_string(),
        descriptors,
    })
}

fn parse_descriptor_value(value: &Value, line: usize) -> Result<Descriptor, ExtractionParseError> {
    let raw_name = value["rawName"]
        .as_str()
        .ok_or_else(|| schema_error(line, "descriptor missing `rawName`"))?
        .to_string();
    let token_index = value["tokenIndex"]
        .as_str()
        .and_then(|raw| raw.parse::<usize>().ok())
        .ok_or_else(|| schema_error(line, "descriptor missing string `tokenIndex`"))?;
    Ok(Descriptor {
        raw_name,
        token_index,
        relation: "compound".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::detect_measurements;
    use crate::graph::build_graph;
    use crate::matcher::extract_context;
    use crate::test_util::build_sentence;
    use crate::{RuleSet, Sentence, UnitGazetteer};

    fn extract_all(sentence: &Sentence) -> Vec<Extraction> {
        let gazetteer = UnitGazetteer::bundled();
        let graph = build_graph(sentence);
        detect_measurements(sentence, gazetteer)
            .iter()
            .map(|span| extract_context(&graph, sentence, span, RuleSet::bundled(), gazetteer))
            .collect()
    }

    fn resolution_sentence() -> Sentence {
        build_sentence(
            1,
            &[
                ("HyspIRI", "NNP", true),
                ("has", "VBZ", true),
                ("a", "DT", true),
                ("spatial", "JJ", true),
                ("resolution", "NN", true),
                ("of", "IN", true),
                ("10", "CD", true),
                ("m", "NN", false),
                (".", ".", false),
            ],
            &[
                (0, 2, "root"),
                (2, 1, "nsubj"),
                (2, 5, "dobj"),
                (5, 3, "det"),
                (5, 4, "amod"),
                (8, 6, "case"),
                (5, 8, "nmod:of"),
                (8, 7, "nummod"),
                (2, 9, "punct"),
            ],
        )
    }

    #[test]
    fn serialized_extraction_matches_golden_schema_bytes() {
        let sentence = resolution_sentence();
        let extractions = extract_all(&sentence);
        assert_eq!(extractions.len(), 1);
        let expected = concat!(
            r#"{"type":"value","quantity":{"parsedValue":10,"normalizedQuantity":10,"#,
            r#""rawValue":"10","rawUnit":{"offsetStart":39,"offsetEnd":40,"#,
            r#""tokenIndices":["8"],"name":"m"},"offsetEnd":38,"offsetStart":36,"#,
            r#""tokenIndex":7,"normalizedUnit":{"type":"length","name":"m","#,
            r#""system":"SI base"},"type":"length"},"related":[{"rawName":"resolution","#,
            r#""connector":"","offsetEnd":32,"relationForm":"nmod:of","offsetStart":22,"#,
            r#""tokenIndex":5,"descriptors":[{"rawName":"spatial","tokenIndex":"4"}]}]}"#,
        );
        assert_eq!(serialize_extraction(&extractions[0]), expected);
    }

    #[test]
    fn empty_related_serializes_as_empty_array() {
        let sentence = build_sentence(
            2,
            &[("7", "CD", true), ("m", "NN", false)],
            &[(0, 2, "root"), (2, 1, "nummod")],
        );
        let extractions = extract_all(&sentence);
        let json = serialize_extraction(&extractions[0]);
        assert!(json.ends_with(r#""related":[]}"#), "{json}");
        // No value modifiers → no descriptors key inside quantity.
        assert!(!json.contains("descriptors"), "{json}");
    }

    #[test]
    fn nanometer_quantity_normalizes_by_si_factor() {
        let sentence = build_sentence(
            3,
            &[("50", "CD", true), ("nm", "NN", false)],
            &[(0, 2, "root"), (2, 1, "nummod")],
        );
        let extractions = extract_all(&sentence);
        let json = serialize_extraction(&extractions[0]);
        let value: Value = serde_json::from_str(&json).unwrap();
        let parsed = value["quantity"]["parsedValue"].as_f64().unwrap();
        let normalized = value["quantity"]["normalizedQuantity"].as_f64().unwrap();
        assert_eq!(parsed, 50.0);
        assert!((normalized - parsed * 1e-9).abs() < 1e-20);
    }

    #[test]
    fn value_modifiers_appear_as_quantity_descriptors() {
        let sentence = build_sentence(
            4,
            &[
                ("The", "DT", true),
                ("beam", "NN", true),
                ("spans", "VBZ", true),
                ("roughly", "RB", true),
                ("50", "CD", true),
                ("m", "NN", false),
                (".", ".", false),
            ],
            &[
                (0, 3, "root"),
                (2, 1, "det"),
                (3, 2, "nsubj"),
                (3, 6, "dobj"),
                (5, 4, "advmod"),
                (6, 5, "nummod"),
                (3, 7, "punct"),
            ],
        );
        let extractions = extract_all(&sentence);
        let json = serialize_extraction(&extractions[0]);
        assert!(
            json.contains(r#""descriptors":[{"rawName":"roughly","tokenIndex":"4"}]"#),
            "{json}"
        );
        let value: Value = serde_json::from_str(&json).unwrap();
        assert!(value["quantity"]["descriptors"].is_array());
    }

    #[test]
    fn whole_and_fractional_numbers_format_distinctly() {
        assert_eq!(format_number(10.0), "10");
        assert_eq!(format_number(0.82), "0.82");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(368.15), "368.15");
        assert_eq!(format_number(5e-8), "5e-8");
        assert_eq!(format_number(1200.0), "1200");
    }

    #[test]
    fn sentence_lines_round_trip_through_the_parser() {
        let sentence = resolution_sentence();
        let extractions = extract_all(&sentence);
        let line = serialize_sentence_line(1, &sentence.text, &extractions);
        let parsed = parse_extraction_lines(&line).unwrap();
        assert_eq!(parsed.len(), 1);
        let record = &parsed[0];
        assert_eq!(record.sentence_num, 1);
        assert_eq!(record.sentence, sentence.text);
        assert_eq!(record.measurements.len(), 1);
        let measurement = &record.measurements[0];
        assert_eq!(measurement.raw_value, "10");
        assert_eq!(measurement.raw_unit_name, "m");
        assert_eq!(measurement.dimension, "length");
        assert_eq!(measurement.normalized_quantity, 10.0);
        assert_eq!(measurement.related.len(), 1);
        let related = &measurement.related[0];
        assert_eq!(related.raw_name, "resolution");
        assert_eq!(related.token_index, 5);
        assert_eq!(related.descriptors.len(), 1);
        assert_eq!(related.descriptors[0].raw_name, "spatial");
        assert_eq!(related.descriptors[0].token_index, 4);
    }

    #[test]
    fn parser_reports_line_numbers() {
        let err = parse_extraction_lines("{\"sentence_num\": 1}\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let good = serialize_sentence_line(1, "x", &[]);
        let text = format!("{good}\nnot json\n");
        let err = parse_extraction_lines(&text).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn blank_lines_are_skipped() {
        let good = serialize_sentence_line(5, "x", &[]);
        let text = format!("\n{good}\n\n");
        let parsed = parse_extraction_lines(&text).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].sentence_num, 5);
    }
}
