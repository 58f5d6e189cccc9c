//! The extraction core: walk the sentence graph away from a measurement's
//! unit token under the rule set, collect related words, then decorate them
//! with descriptors and gather modifiers of the value itself.

pub mod output;

use std::collections::{BTreeMap, HashSet};

use crate::annotation::Sentence;
use crate::detector::{self, MeasurementSpan, NormalizedUnit, UnitGazetteer};
use crate::graph::SentenceGraph;
use crate::rules::{Action, ExpansionSpec, RuleSet};

/// Dependency base types that attach descriptors to a related word.
const DESCRIPTOR_DEPS: [&str; 4] = ["advmod", "amod", "compound", "nummod"];

/// Dependency base types that attach modifiers to the measurement value
/// itself ("around", "roughly", "nearly", ...).
const VALUE_MODIFIER_DEPS: [&str; 2] = ["advmod", "quantmod"];

/// A modifier of a related word (or of the value token).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descriptor {
    /// Surface form of the modifier token.
    pub raw_name: String,
    /// 1-based index of the modifier token.
    pub token_index: usize,
    /// Base type of the edge that contributed the descriptor (e.g. "amod",
    /// "compound"). Not serialized; used to reassemble multiword names.
    pub relation: String,
}

/// A word found to be related to the measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelatedWord {
    pub raw_name: String,
    pub token_index: usize,
    pub offset_start: usize,
    pub offset_end: usize,
    /// The matched edge's raw label, or the label chain joined with "/" when
    /// the word was reached through a clause expansion.
    pub relation_form: String,
    /// The enhanced connector word for conj-type edges, "" otherwise.
    pub connector: String,
    pub descriptors: Vec<Descriptor>,
}

/// A measurement with its full sentence-level context.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub span: MeasurementSpan,
    /// The value converted to base units.
    pub normalized_quantity: f64,
    pub normalized_unit: NormalizedUnit,
    /// Related words ordered by token index.
    pub related: Vec<RelatedWord>,
    /// Modifiers of the value token, ordered by token index.
    pub value_modifiers: Vec<Descriptor>,
}

/// Walks the graph from each unit token of `span` and assembles the
/// extraction for that measurement.
///
/// Every edge incident to a unit token is resolved through the rule set
/// (base type, connector, measurement format), then the neighbor's POS label
/// picks the action: accept the neighbor directly, or expand through verb
/// clauses. Duplicate hits on one token collapse, preferring the direct-edge
/// relation form. Neighbors inside the span itself are never related words.
pub fn extract_context(
    graph: &SentenceGraph,
    sentence: &Sentence,
    span: &MeasurementSpan,
    rules: &RuleSet,
    gazetteer: &UnitGazetteer,
) -> Extraction {
    let span_tokens = span.tokens();
    // token index → (reached by a direct edge, candidate); BTreeMap gives the
    // token-index ordering of the final list for free.
    let mut found: BTreeMap<usize, (bool, RelatedWord)> = BTreeMap::new();
    let mut origins = span.unit_token_indices.clone();
    origins.sort_unstable();
    for origin in origins {
        let Ok(edges) = graph.incident_edges(origin) else {
            continue;
        };
        for edge in edges {
            let neighbor = edge.other(origin);
            if span_tokens.contains(&neighbor) {
                continue;
            }
            let Some(neighbor_token) = sentence.token(neighbor) else {
                continue;
            };
            let Some(matcher) =
                rules.lookup(&edge.base_type, edge.connector.as_deref(), span.format)
            else {
                continue;
            };
            let Some(action) = matcher.match_pos(&neighbor_token.pos) else {
                continue;
            };
            let connector = if edge.base_type == "conj" {
                edge.connector.clone().unwrap_or_default()
            } else {
                String::new()
            };
            match action {
                Action::Accept => {
                    let word = RelatedWord {
                        raw_name: neighbor_token.text.clone(),
                        token_index: neighbor,
                        offset_start: neighbor_token.offset_start,
                        offset_end: neighbor_token.offset_end,
                        relation_form: edge.raw_label.clone(),
                        connector,
                        descriptors: Vec::new(),
                    };
                    insert_candidate(&mut found, true, word);
                }
                Action::Expand(expansion) => {
                    let mut visited = span_tokens.clone();
                    visited.insert(neighbor);
                    let candidates = expand_verb_clause(
                        graph,
                        sentence,
                        neighbor,
                        expansion,
                        &mut visited,
                        1,
                        &span_tokens,
                    );
                    for (token_index, chain) in candidates {
                        let Some(token) = sentence.token(token_index) else {
                            continue;
                        };
                        let relation_form = std::iter::once(edge.raw_label.as_str())
                            .chain(chain.iter().map(String::as_str))
                            .collect::<Vec<_>>()
                            .join("/");
                        let word = RelatedWord {
                            raw_name: token.text.clone(),
                            token_index,
                            offset_start: token.offset_start,
                            offset_end: token.offset_end,
                            relation_form,
                            connector: connector.clone(),
                            descriptors: Vec::new(),
                        };
                        insert_candidate(&mut found, false, word);
                    }
                }
            }
        }
    }
    let mut related: Vec<RelatedWord> = found.into_values().map(|(_, word)| word).collect();
    for word in &mut related {
        word.descriptors = extract_descriptors(graph, sentence, word.token_index)
            .into_iter()
            .filter(|d| !span_tokens.contains(&d.token_index))
            .collect();
    }
    let value_modifiers = extract_value_modifiers(graph, sentence, span.value_token_index);
    let (normalized_quantity, normalized_unit) = detector::normalize(span, gazetteer);
    Extraction {
        span: span.clone(),
        normalized_quantity,
        normalized_unit,
        related,
        value_modifiers,
    }
}

fn insert_candidate(
    found: &mut BTreeMap<usize, (bool, RelatedWord)>,
    direct: bool,
    word: RelatedWord,
) {
    match found.get_mut(&word.token_index) {
        None => {
            found.insert(word.token_index, (direct, word));
        }
        Some(existing) => {
            // A direct edge supersedes a clause-expansion path to the same
            // token; otherwise the first hit stands.
            if direct && !existing.0 {
                *existing = (true, word);
            }
        }
    }
}

/// Collects related-word candidates reachable from `start_token` through a
/// clause expansion.
///
/// Dependents of the start token across `allowed_deps` edges with a POS label
/// starting in "NN" become candidates, each tagged with the raw-label chain
/// that reached it. Neighbors across `chain_deps` edges whose POS starts with
/// "VB" are entered recursively while `depth < max_depth`; the visited set
/// stops cycles among chained tokens.
pub fn expand_verb_clause(
    graph: &SentenceGraph,
    sentence: &Sentence,
    start_token: usize,
    expansion: &ExpansionSpec,
    visited: &mut HashSet<usize>,
    depth: u32,
    excluded: &HashSet<usize>,
) -> Vec<(usize, Vec<String>)> {
    let mut results = Vec::new();
    let Ok(edges) = graph.incident_edges(start_token) else {
        return results;
    };
    for edge in &edges {
        if edge.head != start_token {
            continue;
        }
        if !expansion.allowed_deps.contains(&edge.base_type) {
            continue;
        }
        if excluded.contains(&edge.dependent) {
            continue;
        }
        let Some(token) = sentence.token(edge.dependent) else {
            continue;
        };
        if token.pos.starts_with("NN") {
            results.push((edge.dependent, vec![edge.raw_label.clone()]));
        }
    }
    if depth < expansion.max_depth {
        for edge in &edges {
            if !expansion.chain_deps.contains(&edge.base_type) {
                continue;
            }
            let next = edge.other(start_token);
            if visited.contains(&next) {
                continue;
            }
            let Some(token) = sentence.token(next) else {
                continue;
            };
            if !token.pos.starts_with("VB") {
                continue;
            }
            visited.insert(next);
            for (token_index, mut chain) in expand_verb_clause(
                graph,
                sentence,
                next,
                expansion,
                visited,
                depth + 1,
                excluded,
            ) {
                chain.insert(0, edge.raw_label.clone());
                results.push((token_index, chain));
            }
        }
    }
    results
}

/// One-hop modifiers of a related word: dependents of the related token
/// across descriptor dependencies, ordered by token index.
pub fn extract_descriptors(
    graph: &SentenceGraph,
    sentence: &Sentence,
    related_token: usize,
) -> Vec<Descriptor> {
    collect_dependents(graph, sentence, related_token, &DESCRIPTOR_DEPS)
}

/// Modifiers of the measurement value itself, e.g. "around" in
/// "around 40 elephants".
pub fn extract_value_modifiers(
    graph: &SentenceGraph,
    sentence: &Sentence,
    value_token: usize,
) -> Vec<Descriptor> {
    collect_dependents(graph, sentence, value_token, &VALUE_MODIFIER_DEPS)
}

fn collect_dependents(
    graph: &SentenceGraph,
    sentence: &Sentence,
    head_token: usize,
    base_types: &[&str],
) -> Vec<Descriptor> {
    let mut out = Vec::new();
    let Ok(edges) = graph.incident_edges(head_token) else {
        return out;
    };
    for edge in edges {
        if edge.head != head_token || !base_types.contains(&edge.base_type.as_str()) {
            continue;
        }
        if let Some(token) = sentence.token(edge.dependent) {
            out.push(Descriptor {
                raw_name: token.text.clone(),
                token_index: edge.dependent,
                relation: edge.base_type.clone(),
            });
        }
    }
    out.sort_by_key(|d| d.token_index);
    out.dedup_by(|a, b| a.token_index == b.token_index);
    out
}
