//! The dependency-pattern DSL: load, validate, query, and re-serialize rule
//! files.
//!
//! A rule file is a JSON object mapping dependency base types to rule nodes.
//! See `docs/rule-schema.md` for the full schema. The shape, in brief:
//!
//! ```json
//! {
//!   "nmod": {
//!     "enhanced": true,
//!     "connectors": {
//!       "of":  { "space_between": { "pos_in": { "NN": null } } },
//!       "*":   { "attached":      { "pos_equals": { "VBD": {} } } }
//!     }
//!   },
//!   "dobj": {
//!     "enhanced": false,
//!     "formats": { "space_between": { "pos_equals": { "VBZ": {} } } }
//!   }
//! }
//! ```
//!
//! A matcher value of `null` means *accept* (the neighbor is a related word);
//! an object configures a verb-clause expansion. Connector key `"*"` matches
//! any connector, including none.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use serde_json::Value;
use thiserror::Error;

use crate::detector::MeasurementFormat;

/// Dependency base types accepted without `allow_unknown_deps`.
/// Stanford-dependency and Universal-Dependency v1 inventories combined.
pub const KNOWN_DEPENDENCY_TYPES: &[&str] = &[
    "acl",
    "advcl",
    "advmod",
    "amod",
    "appos",
    "aux",
    "auxpass",
    "case",
    "cc",
    "ccomp",
    "compound",
    "conj",
    "cop",
    "csubj",
    "csubjpass",
    "dep",
    "det",
    "discourse",
    "dislocated",
    "dobj",
    "expl",
    "fixed",
    "flat",
    "goeswith",
    "iobj",
    "list",
    "mark",
    "mwe",
    "name",
    "neg",
    "nmod",
    "nsubj",
    "nsubjpass",
    "nummod",
    "obj",
    "obl",
    "orphan",
    "parataxis",
    "punct",
    "quantmod",
    "ref",
    "root",
    "vocative",
    "xcomp",
];

/// Dependents reachable through these labels are expansion candidates unless
/// a rule overrides `allowedDeps`.
pub const DEFAULT_ALLOWED_DEPS: &[&str] = &[
    "nsubj",
    "nsubjpass",
    "csubj",
    "csubjpass",
    "dobj",
    "iobj",
    "obj",
];

/// Expansion recursion follows these labels unless a rule overrides
/// `chainDeps`.
pub const DEFAULT_CHAIN_DEPS: &[&str] = &["conj", "xcomp"];

const DEFAULT_MAX_DEPTH: u32 = 3;

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("malformed rule JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("rule schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
}

fn schema_error<T>(path: &str, message: impl Into<String>) -> Result<T, RuleError> {
    Err(RuleError::Schema {
        path: path.to_string(),
        message: message.into(),
    })
}

/// Parameters of a verb-clause expansion (see `matcher::expand_verb_clause`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionSpec {
    /// Dependents of the current token across these labels are candidates.
    pub allowed_deps: Vec<String>,
    /// Recursion proceeds to verb neighbors across these labels.
    pub chain_deps: Vec<String>,
    /// Maximum recursion depth (≥ 1; 1 disables chaining).
    pub max_depth: u32,
}

impl Default for ExpansionSpec {
    fn default() -> Self {
        ExpansionSpec {
            allowed_deps: DEFAULT_ALLOWED_DEPS.iter().map(|s| s.to_string()).collect(),
            chain_deps: DEFAULT_CHAIN_DEPS.iter().map(|s| s.to_string()).collect(),
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

/// What to do when a rule matches a neighbor token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    /// The neighbor is a related word; no further evaluation.
    Accept,
    /// Walk into the neighbor's clause looking for subjects/objects.
    Expand(ExpansionSpec),
}

/// POS dispatch: exact tags first, then prefixes (longest prefix wins).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PosMatcher {
    pos_equals: BTreeMap<String, Action>,
    pos_in: BTreeMap<String, Action>,
}

impl PosMatcher {
    /// Resolves a POS tag to an action.
    ///
    /// `pos_equals` is consulted first (exact match); `pos_in` keys match as
    /// prefixes of the tag, the longest matching key winning. Pure and
    /// independent of insertion order.
    pub fn match_pos(&self, pos: &str) -> Option<&Action> {
        if let Some(action) = self.pos_equals.get(pos) {
            return Some(action);
        }
        self.pos_in
            .iter()
            .filter(|(key, _)| pos.starts_with(key.as_str()))
            .max_by_key(|(key, _)| key.len())
            .map(|(_, action)| action)
    }

    fn is_empty(&self) -> bool {
        self.pos_equals.is_empty() && self.pos_in.is_empty()
    }

    fn pos_keys(&self) -> impl Iterator<Item = &str> {
        self.pos_equals
            .keys()
            .chain(self.pos_in.keys())
            .map(String::as_str)
    }
}

/// Per-measurement-format POS matchers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FormatMap {
    formats: BTreeMap<MeasurementFormat, PosMatcher>,
}

impl FormatMap {
    pub fn get(&self, format: MeasurementFormat) -> Option<&PosMatcher> {
        self.formats.get(&format)
    }
}

/// Rules for a single dependency base type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleNode {
    /// Enhanced dependencies: dispatch on the connector word first.
    Enhanced {
        connectors: BTreeMap<String, FormatMap>,
    },
    /// Plain dependencies: dispatch on format directly.
    Plain { formats: FormatMap },
}

/// A validated rule file: dependency base type → rule node.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleSet {
    nodes: BTreeMap<String, RuleNode>,
}

/// Options for [`load_rules_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleOptions {
    /// Accept dependency base types outside [`KNOWN_DEPENDENCY_TYPES`].
    pub allow_unknown_deps: bool,
}

static BUNDLED_RULES: LazyLock<RuleSet> = LazyLock::new(|| {
    load_rules(include_str!("../data/default_rules.json")).expect("bundled rule file is valid")
});

/// Loads and fully validates a rule file (strict: unknown dependency base
/// types are rejected).
pub fn load_rules(input: &str) -> Result<RuleSet, RuleError> {
    load_rules_with(input, RuleOptions::default())
}

/// Loads a rule file with explicit validation options.
pub fn load_rules_with(input: &str, options: RuleOptions) -> Result<RuleSet, RuleError> {
    let document: Value = serde_json::from_str(input)?;
    let Value::Object(root) = document else {
        return schema_error("$", "rule file must be a JSON object");
    };
    let mut nodes = BTreeMap::new();
    for (dep, node_value) in &root {
        if dep.is_empty() {
            return schema_error("$", "dependency base type keys must be non-empty");
        }
        if dep.contains(':') {
            return schema_error(
                dep,
                "base type keys cannot contain ':'; use an enhanced node with connectors",
            );
        }
        if !options.allow_unknown_deps && !KNOWN_DEPENDENCY_TYPES.contains(&dep.as_str()) {
            return schema_error(
                dep,
                format!(
                    "unknown dependency base type {dep:?} (allow_unknown_deps disables this check)"
                ),
            );
        }
        nodes.insert(dep.clone(), parse_node(dep, node_value)?);
    }
    Ok(RuleSet { nodes })
}

fn parse_node(path: &str, value: &Value) -> Result<RuleNode, RuleError> {
    let Value::Object(node) = value else {
        return schema_error(path, "rule node must be a JSON object");
    };
    for key in node.keys() {
        if !matches!(key.as_str(), "enhanced" | "connectors" | "formats") {
            return schema_error(&format!("{path}.{key}"), "unknown rule node key");
        }
    }
    let enhanced = match node.get("enhanced") {
        None => false,
        Some(Value::Bool(v)) => *v,
        Some(_) => return schema_error(&format!("{path}.enhanced"), "must be a boolean"),
    };
    if enhanced {
        if node.contains_key("formats") {
            return schema_error(path, "enhanced node must use `connectors`, not `formats`");
        }
        let Some(connectors_value) = node.get("connectors") else {
            return schema_error(path, "enhanced node requires `connectors`");
        };
        let Value::Object(connector_map) = connectors_value else {
            return schema_error(&format!("{path}.connectors"), "must be a JSON object");
        };
        if connector_map.is_empty() {
            return schema_error(&format!("{path}.connectors"), "must not be empty");
        }
        let mut connectors = BTreeMap::new();
        for (connector, formats_value) in connector_map {
            if connector.is_empty() {
                return schema_error(
                    &format!("{path}.connectors"),
                    "connector keys must be non-empty",
                );
            }
            let connector_path = format!("{path}.connectors.{connector}");
            connectors.insert(
                connector.clone(),
                parse_format_map(&connector_path, formats_value)?,
            );
        }
        Ok(RuleNode::Enhanced { connectors })
    } else {
        if node.contains_key("connectors") {
            return schema_error(
                path,
                "non-enhanced node must use `formats`, not `connectors`",
            );
        }
        let Some(formats_value) = node.get("formats") else {
            return schema_error(path, "non-enhanced node requires `formats`");
        };
        Ok(RuleNode::Plain {
            formats: parse_format_map(&format!("{path}.formats"), formats_value)?,
        })
    }
}

fn parse_format_map(path: &str, value: &Value) -> Result<FormatMap, RuleError> {
    let Value::Object(map) = value else {
        return schema_error(path, "format map must be a JSON object");
    };
    if map.is_empty() {
        return schema_error(path, "format map must list at least one format");
    }
    let mut formats = BTreeMap::new();
    for (key, matcher_value) in map {
        let Some(format) = MeasurementFormat::from_key(key) else {
            return schema_error(
                &format!("{path}.{key}"),
                "unknown format key (expected space_between, attached, or hyphenated)",
            );
        };
        formats.insert(
            format,
            parse_pos_matcher(&format!("{path}.{key}"), matcher_value)?,
        );
    }
    Ok(FormatMap { formats })
}

fn parse_pos_matcher(path: &str, value: &Value) -> Result<PosMatcher, RuleError> {
    let Value::Object(map) = value else {
        return schema_error(path, "POS matcher must be a JSON object");
    };
    let mut matcher = PosMatcher::default();
    for (key, group_value) in map {
        let target = match key.as_str() {
            "pos_in" => &mut matcher.pos_in,
            "pos_equals" => &mut matcher.pos_equals,
            _ => {
                return schema_error(
                    &format!("{path}.{key}"),
                    "expected `pos_in` or `pos_equals`",
                )
            }
        };
        let Value::Object(group) = group_value else {
            return schema_error(&format!("{path}.{key}"), "must be a JSON object");
        };
        for (pos, action_value) in group {
            if pos.is_empty() {
                return schema_error(&format!("{path}.{key}"), "POS keys must be non-empty");
            }
            target.insert(
                pos.clone(),
                parse_action(&format!("{path}.{key}.{pos}"), action_value)?,
            );
        }
    }
    if matcher.is_empty() {
        return schema_error(path, "empty PosMatcher");
    }
    for exact in matcher.pos_equals.keys() {
        if let Some(prefix) = matcher
            .pos_in
            .keys()
            .find(|p| exact.starts_with(p.as_str()))
        {
            return schema_error(
                path,
                format!("pos_equals key {exact:?} overlaps pos_in prefix {prefix:?}"),
            );
        }
    }
    Ok(matcher)
}

fn parse_action(path: &str, value: &Value) -> Result<Action, RuleError> {
    match value {
        Value::Null => Ok(Action::Accept),
        Value::Object(spec) => {
            for key in spec.keys() {
                if !matches!(key.as_str(), "allowedDeps" | "chainDeps" | "maxDepth") {
                    return schema_error(&format!("{path}.{key}"), "unknown expansion key");
                }
            }
            let mut expansion = ExpansionSpec::default();
            if let Some(deps_value) = spec.get("allowedDeps") {
                expansion.allowed_deps =
                    parse_string_list(&format!("{path}.allowedDeps"), deps_value)?;
                if expansion.allowed_deps.is_empty() {
                    return schema_error(&format!("{path}.allowedDeps"), "must be non-empty");
                }
            }
            if let Some(deps_value) = spec.get("chainDeps") {
                expansion.chain_deps = parse_string_list(&format!("{path}.chainDeps"), deps_value)?;
            }
            if let Some(depth_value) = spec.get("maxDepth") {
                let Some(depth) = depth_value.as_u64().filter(|&d| d >= 1) else {
                    return schema_error(&format!("{path}.maxDepth"), "must be an integer ≥ 1");
                };
                expansion.max_depth = depth.min(u32::MAX as u64) as u32;
            }
            Ok(Action::Expand(expansion))
        }
        _ => schema_error(path, "action must be null (accept) or an expansion object"),
    }
}

fn parse_string_list(path: &str, value: &Value) -> Result<Vec<String>, RuleError> {
    let Value::Array(items) = value else {
        return schema_error(path, "must be an array of strings");
    };
    items
        .iter()
        .map(|item| match item {
            Value::String(s) if !s.is_empty() => Ok(s.clone()),
            _ => schema_error(path, "must contain non-empty strings"),
        })
        .collect()
}

impl RuleSet {
    /// The rule set bundled with the library (used by default everywhere).
    pub fn bundled() -> &'static RuleSet {
        &BUNDLED_RULES
    }

    /// Resolves (base type, connector, format) to a POS matcher.
    ///
    /// Enhanced nodes dispatch on the connector: exact key first, then the
    /// `"*"` wildcard (which also covers edges without a connector). Any
    /// miss along the path yields `None`.
    pub fn lookup(
        &self,
        base_type: &str,
        connector: Option<&str>,
        format: MeasurementFormat,
    ) -> Option<&PosMatcher> {
        match self.nodes.get(base_type)? {
            RuleNode::Enhanced { connectors } => connector
                .and_then(|word| connectors.get(word))
                .or_else(|| connectors.get("*"))?
                .get(format),
            RuleNode::Plain { formats } => formats.get(format),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Dependency base types with rules, sorted.
    pub fn dependency_types(&self) -> Vec<&str> {
        self.nodes.keys().map(String::as_str).collect()
    }

    /// Distinct POS keys used anywhere in the rule set.
    pub fn distinct_pos_keys(&self) -> BTreeSet<&str> {
        let mut keys = BTreeSet::new();
        let format_maps = self.nodes.values().flat_map(|node| match node {
            RuleNode::Enhanced { connectors } => connectors.values().collect::<Vec<_>>(),
            RuleNode::Plain { formats } => vec![formats],
        });
        for format_map in format_maps {
            for matcher in format_map.formats.values() {
                keys.extend(matcher.pos_keys());
            }
        }
        keys
    }

    /// Serializes the rule set back to its file format.
    ///
    /// `load_rules(&set.to_json())` reproduces an equal `RuleSet`.
    pub fn to_json(&self) -> String {
        let mut root = serde_json::Map::new();
        for (dep, node) in &self.nodes {
            let mut node_map = serde_json::Map::new();
            match node {
                RuleNode::Enhanced { connectors } => {
                    node_map.insert("enhanced".into(), Value::Bool(true));
                    let mut connector_map = serde_json::Map::new();
                    for (connector, format_map) in connectors {
                        connector_map.insert(connector.clone(), format_map_to_json(format_map));
                    }
                    node_map.insert("connectors".into(), Value::Object(connector_map));
                }
                RuleNode::Plain { formats } => {
                    node_map.insert("enhanced".into(), Value::Bool(false));
                    node_map.insert("formats".into(), format_map_to_json(formats));
                }
            }
            root.insert(dep.clone(), Value::Object(node_map));
        }
        serde_json::to_string_pretty(&Value::Object(root)).expect("rule serialization")
    }
}

fn format_map_to_json(format_map: &FormatMap) -> Value {
    let mut map = serde_json::Map::new();
    for (format, matcher) in &format_map.formats {
        let mut matcher_map = serde_json::Map::new();
        for (group_name, group) in [
            ("pos_equals", &matcher.pos_equals),
            ("pos_in", &matcher.pos_in),
        ] {
            if group.is_empty() {
                continue;
            }
            let mut group_map = serde_json::Map::new();
            for (pos, action) in group {
                group_map.insert(pos.clone(), action_to_json(action));
            }
            matcher_map.insert(group_name.into(), Value::Object(group_map));
        }
        map.insert(format.key().into(), Value::Object(matcher_map));
    }
    Value::Object(map)
}

fn action_to_json(action: &Action) -> Value {
    match action {
        Action::Accept => Value::Null,
        Action::Expand(spec) => serde_json::json!({
            "allowedDeps": spec.allowed_deps,
            "chainDeps": spec.chain_deps,
            "maxDepth": spec.max_depth,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NMOD_OF: &str = r#"{
        "nmod": {
            "enhanced": true,
            "connectors": {
                "of": { "space_between": { "pos_in": { "NN": null } } }
            }
        }
    }"#;

    #[test]
    fn loads_a_minimal_enhanced_entry() {
        let rules = load_rules(NMOD_OF).unwrap();
        let matcher = rules
            .lookup("nmod", Some("of"), MeasurementFormat::SpaceBetween)
            .expect("nested path resolves");
        assert_eq!(matcher.match_pos("NN"), Some(&Action::Accept));
        assert_eq!(matcher.match_pos("NNS"), Some(&Action::Accept));
        assert_eq!(matcher.match_pos("VB"), None);
    }

    #[test]
    fn empty_object_is_an_empty_rule_set() {
        let rules = load_rules("{}").unwrap();
        assert!(rules.is_empty());
        assert!(rules
            .lookup("nmod", Some("of"), MeasurementFormat::Attached)
            .is_none());
    }

    #[test]
    fn enhanced_node_with_formats_is_rejected() {
        let err = load_rules(r#"{"nmod": {"enhanced": true, "formats": {}}}"#).unwrap_err();
        assert!(err.to_string().contains("nmod"), "{err}");
    }

    #[test]
    fn plain_node_with_connectors_is_rejected() {
        assert!(load_rules(r#"{"dobj": {"connectors": {}}}"#).is_err());
    }

    #[test]
    fn unknown_format_key_reports_its_path() {
        let input = r#"{"dobj": {"formats": {"spaced": {"pos_in": {"NN": null}}}}}"#;
        match load_rules(input).unwrap_err() {
            RuleError::Schema { path, .. } => assert_eq!(path, "dobj.formats.spaced"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_pos_matcher_is_rejected() {
        let input = r#"{"dobj": {"formats": {"attached": {}}}}"#;
        let err = load_rules(input).unwrap_err();
        assert!(err.to_string().contains("empty PosMatcher"), "{err}");
    }

    #[test]
    fn max_depth_below_one_is_rejected_with_path() {
        let input =
            r#"{"dobj": {"formats": {"attached": {"pos_equals": {"VBZ": {"maxDepth": 0}}}}}}"#;
        match load_rules(input).unwrap_err() {
            RuleError::Schema { path, .. } => {
                assert_eq!(path, "dobj.formats.attached.pos_equals.VBZ.maxDepth")
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn explicit_empty_allowed_deps_is_rejected() {
        let input =
            r#"{"dobj": {"formats": {"attached": {"pos_equals": {"VBZ": {"allowedDeps": []}}}}}}"#;
        assert!(load_rules(input).is_err());
    }

    #[test]
    fn shadowed_pos_equals_key_is_rejected() {
        let input = r#"{"dobj": {"formats": {"attached": {"pos_in": {"NN": null}, "pos_equals": {"NNS": null}}}}}"#;
        let err = load_rules(input).unwrap_err();
        assert!(err.to_string().contains("overlaps"), "{err}");
    }

    #[test]
    fn unknown_dependency_requires_opt_in() {
        let input = r#"{"frobnicate": {"formats": {"attached": {"pos_in": {"NN": null}}}}}"#;
        assert!(load_rules(input).is_err());
        let rules = load_rules_with(
            input,
            RuleOptions {
                allow_unknown_deps: true,
            },
        )
        .unwrap();
        assert!(!rules.is_empty());
    }

    #[test]
    fn colon_in_base_type_is_rejected() {
        let input = r#"{"acl:relcl": {"formats": {"attached": {"pos_in": {"NN": null}}}}}"#;
        assert!(load_rules(input).is_err());
    }

    #[test]
    fn action_must_be_null_or_object() {
        let input = r#"{"dobj": {"formats": {"attached": {"pos_in": {"NN": "yes"}}}}}"#;
        assert!(load_rules(input).is_err());
    }

    #[test]
    fn lookup_falls_back_to_wildcard_connector() {
        let input = r#"{
            "nmod": {
                "enhanced": true,
                "connectors": {
                    "of": { "space_between": { "pos_in": { "NN": null } } },
                    "*":  { "attached": { "pos_in": { "JJ": null } } }
                }
            }
        }"#;
        let rules = load_rules(input).unwrap();
        // exact connector hit
        assert!(rules
            .lookup("nmod", Some("of"), MeasurementFormat::SpaceBetween)
            .is_some());
        // unknown connector falls back to "*"
        assert!(rules
            .lookup("nmod", Some("npmod"), MeasurementFormat::Attached)
            .is_some());
        // absent connector also uses "*"
        assert!(rules
            .lookup("nmod", None, MeasurementFormat::Attached)
            .is_some());
        // but the wildcard entry does not list space_between
        assert!(rules
            .lookup("nmod", Some("npmod"), MeasurementFormat::SpaceBetween)
            .is_none());
        // and "of" does not list attached
        assert!(rules
            .lookup("nmod", Some("of"), MeasurementFormat::Attached)
            .is_none());
    }

    #[test]
    fn lookup_misses_without_matching_connector_or_format() {
        let rules = load_rules(NMOD_OF).unwrap();
        assert!(rules
            .lookup("nmod", Some("for"), MeasurementFormat::SpaceBetween)
            .is_none());
        let conj_only_space = r#"{
            "conj": {
                "enhanced": true,
                "connectors": { "and": { "space_between": { "pos_in": { "NN": null } } } }
            }
        }"#;
        let rules = load_rules(conj_only_space).unwrap();
        assert!(rules
            .lookup("conj", Some("and"), MeasurementFormat::Attached)
            .is_none());
    }

    #[test]
    fn match_pos_uses_exact_keys_and_longest_prefix() {
        let input = r#"{"dobj": {"formats": {"attached": {
            "pos_in": {"V": {"maxDepth": 1}, "VB": {"maxDepth": 2}},
            "pos_equals": {"NNP": {"maxDepth": 9}}
        }}}}"#;
        let rules = load_rules(input).unwrap();
        let matcher = rules
            .lookup("dobj", None, MeasurementFormat::Attached)
            .unwrap();
        let depth = |pos: &str| match matcher.match_pos(pos) {
            Some(Action::Expand(spec)) => spec.max_depth,
            other => panic!("expected expansion, got {other:?}"),
        };
        assert_eq!(depth("VBD"), 2, "longest prefix wins");
        assert_eq!(depth("VBZ"), 2);
        assert_eq!(depth("V"), 1);
        assert_eq!(depth("NNP"), 9, "exact key hits");
        // pos_equals keys have no prefix semantics and NN has no rule at all.
        assert!(matcher.match_pos("NNPS").is_none());
        assert!(matcher.match_pos("NN").is_none());
    }

    #[test]
    fn expansion_defaults_fill_omitted_keys() {
        let input = r#"{"dobj": {"formats": {"attached": {"pos_equals": {"VBZ": {}}}}}}"#;
        let rules = load_rules(input).unwrap();
        let matcher = rules
            .lookup("dobj", None, MeasurementFormat::Attached)
            .unwrap();
        match matcher.match_pos("VBZ") {
            Some(Action::Expand(spec)) => {
                assert_eq!(spec.allowed_deps, DEFAULT_ALLOWED_DEPS);
                assert_eq!(spec.chain_deps, DEFAULT_CHAIN_DEPS);
                assert_eq!(spec.max_depth, 3);
            }
            other => panic!("expected expansion, got {other:?}"),
        }
    }

    #[test]
    fn accepted_rule_sets_round_trip() {
        for input in [NMOD_OF, include_str!("../data/default_rules.json")] {
            let rules = load_rules(input).unwrap();
            let reloaded = load_rules(&rules.to_json()).unwrap();
            assert_eq!(rules, reloaded);
        }
    }

    #[test]
    fn bundled_rules_stay_within_the_stated_budget() {
        let rules = RuleSet::bundled();
        assert!(!rules.is_empty());
        assert!(
            rules.dependency_types().len() <= 20,
            "too many dependency types"
        );
        assert!(rules.distinct_pos_keys().len() <= 12, "too many POS keys");
    }

    #[test]
    fn bundled_rules_cover_the_documented_entries() {
        let rules = RuleSet::bundled();
        for dep in [
            "nmod",
            "nsubj",
            "nsubjpass",
            "dobj",
            "amod",
            "compound",
            "appos",
            "conj",
            "acl",
            "nummod",
        ] {
            assert!(rules.dependency_types().contains(&dep), "missing {dep}");
        }
        // nmod:of accepts nouns for every format
        for format in MeasurementFormat::ALL {
            let matcher = rules.lookup("nmod", Some("of"), format).unwrap();
            assert_eq!(matcher.match_pos("NN"), Some(&Action::Accept));
        }
        // subject/object deps trigger verb expansion
        let matcher = rules
            .lookup("dobj", None, MeasurementFormat::SpaceBetween)
            .unwrap();
        assert!(matches!(matcher.match_pos("VBZ"), Some(Action::Expand(_))));
        assert!(matcher.match_pos("NN").is_none());
    }
}
