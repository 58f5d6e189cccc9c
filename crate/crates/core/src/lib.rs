//! Measurement extraction from dependency-annotated text.
//!
//! The pipeline has four stages:
//!
//! 1. **Annotation ingestion** ([`annotation`]): read tokenized, POS-tagged,
//!    dependency-parsed sentences from CoNLL-U files, annotation-service JSON,
//!    or a live HTTP annotation service.
//! 2. **Measurement detection** ([`detector`]): find numeric value + unit
//!    spans ("10 m", "82%", "10-K") and normalize them against a unit
//!    gazetteer.
//! 3. **Context matching** ([`matcher`]): treat the sentence as an undirected
//!    labeled graph ([`graph`]) and walk outward from the unit token under a
//!    configurable rule set ([`rules`]) to collect the words a measurement
//!    describes, plus their descriptors.
//! 4. **Scoring** ([`evaluation`]): compare extractions against hand labels
//!    and report precision / recall / F-measure.
//!
//! [`pipeline`] ties the stages together for batch processing and powers the
//! `quantext` command-line tool.

pub mod annotation;
pub mod detector;
pub mod evaluation;
pub mod graph;
pub mod matcher;
pub mod pipeline;
pub mod rules;

pub use annotation::{DependencyArc, Sentence, Token};
pub use detector::{MeasurementFormat, MeasurementSpan, NormalizedUnit, UnitGazetteer};
pub use evaluation::{LabeledEntity, LabeledMeasurement, LabeledSentence};
pub use graph::SentenceGraph;
pub use matcher::{Descriptor, Extraction, RelatedWord};
pub use rules::RuleSet;

#[cfg(test)]
pub(crate) mod test_util {
    use crate::annotation::{DependencyArc, Sentence, Token};

    /// Builds a validated sentence from (text, pos, space_after) triples and
    /// (head, dependent, label) arcs. Offsets are derived from the words.
    pub fn build_sentence(
        id: i64,
        words: &[(&str, &str, bool)],
        arcs: &[(usize, usize, &str)],
    ) -> Sentence {
        let mut text = String::new();
        let mut tokens = Vec::new();
        for (i, &(word, pos, space_after)) in words.iter().enumerate() {
            let offset_start = text.len();
            text.push_str(word);
            let offset_end = text.len();
            if space_after {
                text.push(' ');
            }
            tokens.push(Token {
                index: i + 1,
                text: word.to_string(),
                pos: pos.to_string(),
                offset_start,
                offset_end,
                lemma: None,
            });
        }
        let sentence = Sentence {
            id,
            text: text.trim_end().to_string(),
            tokens,
            arcs: arcs
                .iter()
                .map(|&(head, dependent, label)| DependencyArc::new(head, dependent, label))
                .collect(),
        };
        sentence.validate().expect("test sentence must be valid");
        sentence
    }
}
