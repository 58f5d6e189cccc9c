//! Unit gazetteer: surface form → normalization template.
//!
//! The gazetteer file is UTF-8 text, one record per line, six tab-separated
//! columns: surface form, base unit name, dimension, system, factor to base,
//! offset to base. Blank lines and `#` comments are ignored. Surface forms
//! are case-sensitive and may contain spaces ("degrees Celsius"), which is
//! how multi-token units are matched.

use std::collections::{BTreeSet, HashMap};
use std::sync::LazyLock;

use thiserror::Error;

/// A unit normalization template: what a surface form normalizes to.
///
/// `normalizedQuantity == parsedValue × factor_to_base + offset_to_base`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedUnit {
    /// Base unit symbol ("m", "kg", "1" for dimensionless fractions).
    pub name: String,
    /// Dimension name ("length", "mass", "fraction", …); serialized as the
    /// unit's `type`.
    pub dimension: String,
    /// "SI base", "SI derived", "non SI", or "unknown".
    pub system: String,
    pub factor_to_base: f64,
    pub offset_to_base: f64,
}

impl NormalizedUnit {
    /// Template for a surface form the gazetteer does not know.
    pub fn unknown(raw_unit_name: &str) -> Self {
        NormalizedUnit {
            name: raw_unit_name.to_string(),
            dimension: "unknown".to_string(),
            system: "unknown".to_string(),
            factor_to_base: 1.0,
            offset_to_base: 0.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("gazetteer line {line}: {message}")]
    Line { line: usize, message: String },
}

/// Lookup table from unit surface forms to normalization templates.
#[derive(Debug, Clone)]
pub struct UnitGazetteer {
    entries: HashMap<String, NormalizedUnit>,
    max_surface_words: usize,
}

static DEFAULT_GAZETTEER: LazyLock<UnitGazetteer> = LazyLock::new(|| {
    UnitGazetteer::parse(include_str!("../../data/default_units.tsv"))
        .expect("bundled gazetteer is valid")
});

impl UnitGazetteer {
    /// Parses a gazetteer file.
    pub fn parse(input: &str) -> Result<Self, GazetteerError> {
        let mut entries = HashMap::new();
        let mut max_surface_words = 1;
        for (line_index, line) in input.lines().enumerate() {
            let line_number = line_index + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let columns: Vec<&str> = line.split('\t').collect();
            if columns.len() != 6 {
                return Err(GazetteerError::Line {
                    line: line_number,
                    message: format!("expected 6 tab-separated columns, found {}", columns.len()),
                });
            }
            let surface = columns[0];
            if surface.is_empty() {
                return Err(GazetteerError::Line {
                    line: line_number,
                    message: "empty surface form".to_string(),
                });
            }
            let parse_number = |column: usize, what: &str| -> Result<f64, GazetteerError> {
                columns[column]
                    .parse::<f64>()
                    .map_err(|_| GazetteerError::Line {
                        line: line_number,
                        message: format!("invalid {what} {:?}", columns[column]),
                    })
            };
            let factor_to_base = parse_number(4, "factor")?;
            if factor_to_base <= 0.0 || factor_to_base.is_nan() {
                return Err(GazetteerError::Line {
                    line: line_number,
                    message: format!("factor must be > 0, got {factor_to_base}"),
                });
            }
            let entry = NormalizedUnit {
                name: columns[1].to_string(),
                dimension: columns[2].to_string(),
                system: columns[3].to_string(),
                factor_to_base,
                offset_to_base: parse_number(5, "offset")?,
            };
            if entries.insert(surface.to_string(), entry).is_some() {
                return Err(GazetteerError::Line {
                    line: line_number,
                    message: format!("duplicate surface form {surface:?}"),
                });
            }
            max_surface_words = max_surface_words.max(surface.split(' ').count());
        }
        Ok(UnitGazetteer {
            entries,
            max_surface_words,
        })
    }

    /// The gazetteer bundled with the library.
    pub fn bundled() -> &'static UnitGazetteer {
        &DEFAULT_GAZETTEER
    }

    pub fn lookup(&self, surface: &str) -> Option<&NormalizedUnit> {
        self.entries.get(surface)
    }

    /// Longest surface form, in space-separated words (≥ 1).
    pub fn max_surface_words(&self) -> usize {
        self.max_surface_words
    }

    /// All dimension names the gazetteer can normalize into, sorted.
    pub fn dimensions(&self) -> BTreeSet<&str> {
        self.entries
            .values()
            .map(|e| e.dimension.as_str())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_gazetteer_loads_and_covers_core_units() {
        let gazetteer = UnitGazetteer::bundled();
        assert!(gazetteer.len() >= 50, "expected a broad default table");
        let nm = gazetteer.lookup("nm").unwrap();
        assert_eq!(nm.name, "m");
        assert_eq!(nm.dimension, "length");
        assert_eq!(nm.factor_to_base, 1e-9);
        let percent = gazetteer.lookup("%").unwrap();
        assert_eq!(percent.name, "1");
        assert_eq!(percent.dimension, "fraction");
        assert_eq!(percent.system, "non SI");
        assert_eq!(percent.factor_to_base, 0.01);
        let celsius = gazetteer.lookup("°C").unwrap();
        assert_eq!(celsius.name, "K");
        assert_eq!(celsius.offset_to_base, 273.15);
        assert_eq!(gazetteer.lookup("degrees Celsius"), Some(celsius));
        assert!(gazetteer.max_surface_words() >= 2);
        assert!(gazetteer.lookup("furlong").is_none());
    }

    #[test]
    fn dimensions_are_sorted_and_deduplicated() {
        let dims = UnitGazetteer::bundled().dimensions();
        let listed: Vec<&str> = dims.into_iter().collect();
        assert!(listed.contains(&"length"));
        assert!(listed.contains(&"fraction"));
        assert!(listed.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_column_count() {
        let err = UnitGazetteer::parse("m\tm\tlength\tSI base\t1\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn rejects_nonpositive_factor() {
        assert!(UnitGazetteer::parse("m\tm\tlength\tSI base\t0\t0\n").is_err());
        assert!(UnitGazetteer::parse("m\tm\tlength\tSI base\t-1\t0\n").is_err());
        assert!(UnitGazetteer::parse("m\tm\tlength\tSI base\tNaN\t0\n").is_err());
    }

    #[test]
    fn rejects_duplicate_surface() {
        let input = "m\tm\tlength\tSI base\t1\t0\nm\tm\tlength\tSI base\t1\t0\n";
        assert!(UnitGazetteer::parse(input).is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let input = "# length\n\nm\tm\tlength\tSI base\t1\t0\n";
        assert_eq!(UnitGazetteer::parse(input).unwrap().len(), 1);
    }
}
