//! Corpus-level plumbing: run extraction over many sentences (optionally in
//! parallel), align labels for scoring, and bin normalized quantities.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::annotation::Sentence;
use crate::detector::{apply_override_spans, detect_measurements, AlignmentError, UnitGazetteer};
use crate::evaluation::{score_sentence, ConfusionCounts, LabeledSentence};
use crate::graph::build_graph;
use crate::matcher::output::{serialize_sentence_line, ParsedSentence};
use crate::matcher::{extract_context, Extraction};
use crate::rules::RuleSet;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Alignment(#[from] AlignmentError),
    #[error("labels reference sentences missing from the corpus: {}", format_ids(.ids))]
    MissingSentences { ids: Vec<i64> },
    #[error("unknown dimension \"{requested}\"; known dimensions: {}", known.join(", "))]
    UnknownDimension {
        requested: String,
        known: Vec<String>,
    },
    #[error("could not build worker pool: {0}")]
    ThreadPool(String),
}

fn format_ids(ids: &[i64]) -> String {
    ids.iter()
        .map(i64::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Where measurement spans come from.
#[derive(Debug, Clone, Copy)]
pub enum SpanSource<'a> {
    /// Run the detector over each sentence.
    Detector,
    /// Bypass the detector and locate the labeled (number, unit) pairs.
    Labels(&'a [LabeledSentence]),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExtractOptions {
    /// Escalate per-sentence alignment failures instead of skipping them.
    pub strict: bool,
}

/// Extractions for one sentence, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceRecord {
    pub sentence_num: i64,
    pub sentence: String,
    pub extractions: Vec<Extraction>,
}

/// Corpus-level totals reported after extraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtractionSummary {
    pub sentences: usize,
    pub measurements: usize,
    pub related_words: usize,
}

/// Run a closure on a dedicated worker pool of `jobs` threads, or inline on
/// the default pool when `jobs` is `None`.
pub fn with_jobs<T: Send>(
    jobs: Option<usize>,
    work: impl FnOnce() -> T + Send,
) -> Result<T, PipelineError> {
    match jobs {
        None => Ok(work()),
        Some(threads) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| PipelineError::ThreadPool(e.to_string()))?
            .install(work)),
    }
}

/// Extract every sentence of the corpus. Sentences are processed in parallel
/// and results returned in input order.
pub fn extract_corpus(
    sentences: &[Sentence],
    rules: &RuleSet,
    gazetteer: &UnitGazetteer,
    source: SpanSource<'_>,
    options: ExtractOptions,
) -> Result<(Vec<SentenceRecord>, ExtractionSummary), PipelineError> {
    let labels_by_num: HashMap<i64, &LabeledSentence> = match source {
        SpanSource::Detector => HashMap::new(),
        SpanSource::Labels(labels) => labels.iter().map(|l| (l.sentence_num, l)).collect(),
    };
    let records: Vec<SentenceRecord> = sentences
        .par_iter()
        .map(|sentence| -> Result<SentenceRecord, PipelineError> {
            let spans = match source {
                SpanSource::Detector => detect_measurements(sentence, gazetteer),
                SpanSource::Labels(_) => match labels_by_num.get(&sentence.id) {
                    None => Vec::new(),
                    Some(labeled) => match apply_override_spans(sentence, labeled) {
                        Ok(spans) => spans,
                        Err(err) if options.strict => return Err(err.into()),
                        Err(err) => {
                            log::warn!("skipping sentence {}: {err}", sentence.id);
                            Vec::new()
                        }
                    },
                },
            };
            let graph = build_graph(sentence);
            let extractions = spans
                .iter()
                .map(|span| extract_context(&graph, sentence, span, rules, gazetteer))
                .collect();
            Ok(SentenceRecord {
                sentence_num: sentence.id,
                sentence: sentence.text.clone(),
                extractions,
            })
        })
        .collect::<Result<_, _>>()?;
    let summary = ExtractionSummary {
        sentences: records.len(),
        measurements: records.iter().map(|r| r.extractions.len()).sum(),
        related_words: records
            .iter()
            .flat_map(|r| &r.extractions)
            .map(|e| e.related.len())
            .sum(),
    };
    Ok((records, summary))
}

/// Serialize records as JSON Lines; sentences without measurements are
/// omitted.
pub fn render_extractions(records: &[SentenceRecord]) -> String {
    let mut out = String::new();
    for record in records {
        if record.extractions.is_empty() {
            continue;
        }
        out.push_str(&serialize_sentence_line(
            record.sentence_num,
            &record.sentence,
            &record.extractions,
        ));
        out.push('\n');
    }
    out
}

/// How extraction runs during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationMode {
    /// Ground-truth spans are injected; scores isolate the matcher.
    OverrideSpans,
    /// The detector finds spans; scores cover the full pipeline.
    EndToEnd,
}

/// Score a corpus against labels, returning summed confusion counts.
///
/// Every labeled sentence must exist in the corpus. In override mode each
/// labeled measurement is located in its sentence and scored against the
/// extraction from that span; end-to-end mode pairs detected spans with
/// labeled measurements by (number, unit) in textual order, with unpaired
/// sides counted as false positives/negatives.
pub fn evaluate_corpus(
    sentences: &[Sentence],
    labels: &[LabeledSentence],
    rules: &RuleSet,
    gazetteer: &UnitGazetteer,
    mode: EvaluationMode,
) -> Result<ConfusionCounts, PipelineError> {
    let by_id: HashMap<i64, &Sentence> = sentences.iter().map(|s| (s.id, s)).collect();
    let mut missing: Vec<i64> = labels
        .iter()
        .map(|l| l.sentence_num)
        .filter(|num| !by_id.contains_key(num))
        .collect();
    if !missing.is_empty() {
        missing.sort_unstable();
        missing.dedup();
        return Err(PipelineError::MissingSentences { ids: missing });
    }
    let per_sentence: Vec<ConfusionCounts> = labels
        .par_iter()
        .map(|labeled| -> Result<ConfusionCounts, PipelineError> {
            let sentence = by_id[&labeled.sentence_num];
            let graph = build_graph(sentence);
            let mut counts = ConfusionCounts::default();
            match mode {
                EvaluationMode::OverrideSpans => {
                    let spans = apply_override_spans(sentence, labeled)?;
                    for (span, measurement) in spans.iter().zip(&labeled.measurements) {
                        let extraction = extract_context(&graph, sentence, span, rules, gazetteer);
                        counts.absorb(score_sentence(&extraction.related, &measurement.related));
                    }
                }
                EvaluationMode::EndToEnd => {
                    let spans = detect_measurements(sentence, gazetteer);
                    let extractions: Vec<Extraction> = spans
                        .iter()
                        .map(|span| extract_context(&graph, sentence, span, rules, gazetteer))
                        .collect();
                    let mut used = vec![false; extractions.len()];
                    for measurement in &labeled.measurements {
                        let paired = extractions.iter().enumerate().find(|(i, e)| {
                            !used[*i]
                                && e.span.raw_value == measurement.number
                                && e.span.raw_unit_name == measurement.unit
                        });
                        match paired {
                            Some((i, extraction)) => {
                                used[i] = true;
                                counts.absorb(score_sentence(
                                    &extraction.related,
                                    &measurement.related,
                                ));
                            }
                            // Missed measurement: all its labeled entities
                            // are false negatives.
                            None => counts.absorb(score_sentence(&[], &measurement.related)),
                        }
                    }
                    for (i, extraction) in extractions.iter().enumerate() {
                        if !used[i] {
                            // Spurious measurement: its related words are
                            // false positives.
                            counts.absorb(score_sentence(&extraction.related, &[]));
                        }
                    }
                }
            }
            Ok(counts)
        })
        .collect::<Result<_, _>>()?;
    let mut total = ConfusionCounts::default();
    for counts in per_sentence {
        total.absorb(counts);
    }
    Ok(total)
}

/// Score previously written extraction output against labels.
///
/// A labeled sentence absent from the records is treated as having no
/// extractions (sentences without measurements are omitted from output), so
/// its entities count as false negatives.
pub fn score_extraction_records(
    records: &[ParsedSentence],
    labels: &[LabeledSentence],
) -> ConfusionCounts {
    let by_num: HashMap<i64, &ParsedSentence> =
        records.iter().map(|r| (r.sentence_num, r)).collect();
    let mut total = ConfusionCounts::default();
    let mut scored: HashSet<(i64, usize)> = HashSet::new();
    for labeled in labels {
        let record = by_num.get(&labeled.sentence_num);
        let measurements = record.map(|r| r.measurements.as_slice()).unwrap_or(&[]);
        let mut used = vec![false; measurements.len()];
        for measurement in &labeled.measurements {
            let paired = measurements.iter().enumerate().find(|(i, m)| {
                !used[*i]
                    && m.raw_value == measurement.number
                    && m.raw_unit_name == measurement.unit
            });
            match paired {
                Some((i, parsed)) => {
                    used[i] = true;
                    scored.insert((labeled.sentence_num, i));
                    total.absorb(score_sentence(&parsed.related, &measurement.related));
                }
                None => total.absorb(score_sentence(&[], &measurement.related)),
            }
        }
        for (i, parsed) in measurements.iter().enumerate() {
            if !used[i] {
                scored.insert((labeled.sentence_num, i));
                total.absorb(score_sentence(&parsed.related, &[]));
            }
        }
    }
    // Records for sentences that were never labeled are extractions with no
    // ground truth: every related word is a false positive.
    for record in records {
        for (i, parsed) in record.measurements.iter().enumerate() {
            if !scored.contains(&(record.sentence_num, i)) {
                total.absorb(score_sentence(&parsed.related, &[]));
            }
        }
    }
    total
}

/// Fail unless `requested` is a dimension the gazetteer knows about.
pub fn validate_dimension(requested: &str, gazetteer: &UnitGazetteer) -> Result<(), PipelineError> {
    let known: Vec<String> = gazetteer
        .dimensions()
        .into_iter()
        .map(str::to_string)
        .collect();
    if known.iter().any(|d| d == requested) {
        Ok(())
    } else {
        Err(PipelineError::UnknownDimension {
            requested: requested.to_string(),
            known,
        })
    }
}

/// Bin index for `value` under left-closed, right-open bins of `width`
/// anchored at zero.
///
/// Quotients within 1e-9 relative tolerance of an integer snap to it, so
/// values that are equal up to float noise ("1900 nm" vs "1.9 μm") land in
/// the same bin instead of straddling a boundary.
pub fn bin_index(value: f64, width: f64) -> i64 {
    let quotient = value / width;
    let snapped = quotient.round();
    if (quotient - snapped).abs() < 1e-9 * quotient.abs().max(1.0) {
        snapped as i64
    } else {
        quotient.floor() as i64
    }
}

/// Lower bound of a bin in base units.
pub fn bin_lower_bound(index: i64, width: f64) -> f64 {
    index as f64 * width
}

/// Histogram of normalized quantities: bin index → count.
pub fn histogram<I: IntoIterator<Item = f64>>(values: I, bin_width: f64) -> BTreeMap<i64, u64> {
    let mut bins = BTreeMap::new();
    for value in values {
        *bins.entry(bin_index(value, bin_width)).or_insert(0) += 1;
    }
    bins
}

/// Normalized quantities of the given dimension across extraction records.
pub fn quantities_of_dimension(records: &[SentenceRecord], dimension: &str) -> Vec<f64> {
    records
        .iter()
        .flat_map(|r| &r.extractions)
        .filter(|e| e.normalized_unit.dimension == dimension)
        .map(|e| e.normalized_quantity)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{LabeledEntity, LabeledMeasurement};
    use crate::matcher::output::parse_extraction_lines;
    use crate::test_util::build_sentence;

    fn tower() -> Sentence {
        build_sentence(
            1,
            &[
                ("The", "DT", true),
                ("tower", "NN", true),
                ("rises", "VBZ", true),
                ("130", "CD", true),
                ("m", "NN", false),
                (".", ".", false),
            ],
            &[
                (0, 3, "root"),
                (2, 1, "det"),
                (3, 2, "nsubj"),
                (3, 5, "dobj"),
                (5, 4, "nummod"),
                (3, 6, "punct"),
            ],
        )
    }

    fn survey() -> Sentence {
        build_sentence(
            2,
            &[
                ("The", "DT", true),
                ("survey", "NN", true),
                ("covered", "VBD", true),
                ("12", "CD", true),
                ("km", "NN", false),
                (".", ".", false),
            ],
            &[
                (0, 3, "root"),
                (2, 1, "det"),
                (3, 2, "nsubj"),
                (3, 5, "dobj"),
                (5, 4, "nummod"),
                (3, 6, "punct"),
            ],
        )
    }

    fn labels_for(sentences: &[(i64, &str, &str, &str, &[&str])]) -> Vec<LabeledSentence> {
        sentences
            .iter()
            .map(|(num, text, number, unit, related)| LabeledSentence {
                sentence_num: *num,
                sentence: text.to_string(),
                measurements: vec![LabeledMeasurement {
                    number: number.to_string(),
                    unit: unit.to_string(),
                    related: related
                        .iter()
                        .map(|name| LabeledEntity {
                            name: name.to_string(),
                            descriptors: Vec::new(),
                        })
                        .collect(),
                }],
            })
            .collect()
    }

    #[test]
    fn extract_corpus_reports_summary_totals() {
        let sentences = [tower(), survey()];
        let (records, summary) = extract_corpus(
            &sentences,
            RuleSet::bundled(),
            UnitGazetteer::bundled(),
            SpanSource::Detector,
            ExtractOptions::default(),
        )
        .unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(summary.sentences, 2);
        assert_eq!(summary.measurements, 2);
        assert_eq!(summary.related_words, 2);
        // Input order is preserved.
        assert_eq!(records[0].sentence_num, 1);
        assert_eq!(records[1].sentence_num, 2);
    }

    #[test]
    fn worker_pool_size_does_not_change_results() {
        let sentences = [tower(), survey()];
        let run = || {
            extract_corpus(
                &sentences,
                RuleSet::bundled(),
                UnitGazetteer::bundled(),
                SpanSource::Detector,
                ExtractOptions::default(),
            )
            .unwrap()
        };
        let baseline = run();
        let pooled = with_jobs(Some(2), run).unwrap();
        assert_eq!(baseline.0, pooled.0);
        assert_eq!(baseline.1, pooled.1);
    }

    #[test]
    fn override_spans_bypass_the_detector() {
        // "furlongs" is not in the gazetteer, so the detector cannot produce
        // this span; the labels still can.
        let sentences = [build_sentence(
            3,
            &[
                ("It", "PRP", true),
                ("ran", "VBD", true),
                ("7", "CD", true),
                ("furlongs", "NNS", false),
                (".", ".", false),
            ],
            &[
                (0, 2, "root"),
                (2, 1, "nsubj"),
                (2, 4, "dobj"),
                (4, 3, "nummod"),
                (2, 5, "punct"),
            ],
        )];
        let labels = labels_for(&[(3, "It ran 7 furlongs.", "7", "furlongs", &[])]);
        let (records, summary) = extract_corpus(
            &sentences,
            RuleSet::bundled(),
            UnitGazetteer::bundled(),
            SpanSource::Labels(&labels),
            ExtractOptions::default(),
        )
        .unwrap();
        assert_eq!(summary.measurements, 1);
        let extraction = &records[0].extractions[0];
        assert_eq!(extraction.span.raw_unit_name, "furlongs");
        assert_eq!(extraction.normalized_unit.system, "unknown");
        let (_, detector_summary) = extract_corpus(
            &sentences,
            RuleSet::bundled(),
            UnitGazetteer::bundled(),
            SpanSource::Detector,
            ExtractOptions::default(),
        )
        .unwrap();
        assert_eq!(detector_summary.measurements, 0);
    }

    #[test]
    fn strict_mode_escalates_alignment_failures() {
        let labels = labels_for(&[(1, "The tower rises 130 m.", "999", "kg", &[])]);
        let sentences = [tower()];
        let strict = extract_corpus(
            &sentences,
            RuleSet::bundled(),
            UnitGazetteer::bundled(),
            SpanSource::Labels(&labels),
            ExtractOptions { strict: true },
        );
        assert!(matches!(strict, Err(PipelineError::Alignment(_))));
        let lenient = extract_corpus(
            &sentences,
            RuleSet::bundled(),
            UnitGazetteer::bundled(),
            SpanSource::Labels(&labels),
            ExtractOptions::default(),
        )
        .unwrap();
        assert_eq!(lenient.1.measurements, 0);
    }

    #[test]
    fn evaluate_corpus_scores_override_spans() {
        let sentences = [tower(), survey()];
        let labels = labels_for(&[
            (1, "The tower rises 130 m.", "130", "m", &["tower"]),
            (
                2,
                "The survey covered 12 km.",
                "12",
                "km",
                &["survey", "area"],
            ),
        ]);
        let counts = evaluate_corpus(
            &sentences,
            &labels,
            RuleSet::bundled(),
            UnitGazetteer::bundled(),
            EvaluationMode::OverrideSpans,
        )
        .unwrap();
        // tower ✓, survey ✓, "area" unmatched.
        assert_eq!(counts, ConfusionCounts::new(2, 0, 1));
    }

    #[test]
    fn evaluate_corpus_rejects_unknown_sentence_numbers() {
        let sentences = [tower()];
        let labels = labels_for(&[
            (1, "The tower rises 130 m.", "130", "m", &["tower"]),
            (99, "Missing.", "1", "m", &[]),
            (42, "Also missing.", "2", "m", &[]),
        ]);
        let err = evaluate_corpus(
            &sentences,
            &labels,
            RuleSet::bundled(),
            UnitGazetteer::bundled(),
            EvaluationMode::OverrideSpans,
        )
        .unwrap_err();
        let message = err.to_string();
        assert!(
            message.contains("42") && message.contains("99"),
            "{message}"
        );
    }

    #[test]
    fn end_to_end_mode_counts_missed_and_spurious_measurements() {
        let sentences = [tower()];
        // The labeled measurement "9 kg" is never detected (fn for its
        // entity); the detected "130 m" has no matching label, so its related
        // word becomes a false positive.
        let labels = labels_for(&[(1, "The tower rises 130 m.", "9", "kg", &["crane"])]);
        let counts = evaluate_corpus(
            &sentences,
            &labels,
            RuleSet::bundled(),
            UnitGazetteer::bundled(),
            EvaluationMode::EndToEnd,
        )
        .unwrap();
        assert_eq!(counts, ConfusionCounts::new(0, 1, 1));
    }

    #[test]
    fn rescoring_written_output_matches_single_pass_evaluation() {
        let sentences = [tower(), survey()];
        let labels = labels_for(&[
            (1, "The tower rises 130 m.", "130", "m", &["tower"]),
            (
                2,
                "The survey covered 12 km.",
                "12",
                "km",
                &["survey", "area"],
            ),
        ]);
        let (records, _) = extract_corpus(
            &sentences,
            RuleSet::bundled(),
            UnitGazetteer::bundled(),
            SpanSource::Labels(&labels),
            ExtractOptions { strict: true },
        )
        .unwrap();
        let text = render_extractions(&records);
        let parsed = parse_extraction_lines(&text).unwrap();
        let rescored = score_extraction_records(&parsed, &labels);
        let single_pass = evaluate_corpus(
            &sentences,
            &labels,
            RuleSet::bundled(),
            UnitGazetteer::bundled(),
            EvaluationMode::OverrideSpans,
        )
        .unwrap();
        assert_eq!(rescored, single_pass);
    }

    #[test]
    fn histogram_bins_are_left_closed_with_snapping() {
        let bins = histogram([10.0, 500.0, 30.0], 100.0);
        assert_eq!(bins.get(&0), Some(&2));
        assert_eq!(bins.get(&5), Some(&1));
        assert_eq!(bin_lower_bound(5, 100.0), 500.0);
        // Float noise at a boundary snaps rather than falling one bin low.
        assert_eq!(bin_index(0.3, 0.1), 3);
        assert_eq!(bin_index(1900e-9, 1e-7), bin_index(1.9e-6, 1e-7));
        assert_eq!(bin_index(99.999, 100.0), 0);
        assert_eq!(bin_index(-0.5, 1.0), -1);
    }

    #[test]
    fn unknown_dimension_lists_known_ones() {
        let err = validate_dimension("speed", UnitGazetteer::bundled()).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("speed"));
        assert!(message.contains("length"), "{message}");
        assert!(validate_dimension("length", UnitGazetteer::bundled()).is_ok());
    }
}
