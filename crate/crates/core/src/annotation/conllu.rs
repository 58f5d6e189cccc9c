//! CoNLL-U reader.
//!
//! Sentences are blocks of 10-column tab-separated lines, separated by blank
//! lines. `#` lines are comments; a `# sent_id = N` comment with an integer
//! value sets the sentence id, otherwise sentences are numbered 1, 2, … in
//! file order. Sentence text and character offsets are reconstructed from the
//! token forms plus `SpaceAfter=No` annotations in the MISC column.

use super::{AnnotationError, DependencyArc, Sentence, Token};

const COLUMNS: usize = 10;

/// Parses a CoNLL-U document into sentences.
///
/// Multiword-token ranges (`1-2`) and empty nodes (`1.1`) are skipped with a
/// warning. Dependency arcs are collected from both the basic HEAD/DEPREL
/// columns and the enhanced DEPS column, de-duplicated on
/// (head, dependent, label).
pub fn parse_conllu(input: &str) -> Result<Vec<Sentence>, AnnotationError> {
    let mut sentences = Vec::new();
    let mut builder = SentenceBuilder::new();
    for (line_index, line) in input.lines().enumerate() {
        let line_number = line_index + 1;
        if line.trim().is_empty() {
            if let Some(sentence) = builder.finish(sentences.len() as i64 + 1)? {
                sentences.push(sentence);
            }
            builder = SentenceBuilder::new();
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            builder.comment(comment);
            continue;
        }
        builder.token_line(line, line_number)?;
    }
    if let Some(sentence) = builder.finish(sentences.len() as i64 + 1)? {
        sentences.push(sentence);
    }
    Ok(sentences)
}

struct SentenceBuilder {
    sent_id: Option<i64>,
    text: String,
    tokens: Vec<Token>,
    arcs: Vec<DependencyArc>,
    seen_arcs: std::collections::HashSet<(usize, usize, String)>,
    pending_space: bool,
    saw_content: bool,
    first_line: usize,
}

impl SentenceBuilder {
    fn new() -> Self {
        SentenceBuilder {
            sent_id: None,
            text: String::new(),
            tokens: Vec::new(),
            arcs: Vec::new(),
            seen_arcs: std::collections::HashSet::new(),
            pending_space: false,
            saw_content: false,
            first_line: 0,
        }
    }

    fn comment(&mut self, comment: &str) {
        self.saw_content = true;
        if let Some((key, value)) = comment.split_once('=') {
            if key.trim() == "sent_id" {
                if let Ok(id) = value.trim().parse::<i64>() {
                    self.sent_id = Some(id);
                }
            }
        }
    }

    fn token_line(&mut self, line: &str, line_number: usize) -> Result<(), AnnotationError> {
        self.saw_content = true;
        if self.first_line == 0 {
            self.first_line = line_number;
        }
        let columns: Vec<&str> = line.split('\t').collect();
        if columns.len() != COLUMNS {
            return Err(AnnotationError::Conllu {
                line: line_number,
                message: format!(
                    "expected {} tab-separated columns, found {}",
                    COLUMNS,
                    columns.len()
                ),
            });
        }
        let id_column = columns[0];
        if id_column.contains('-') {
            log::warn!(
                "line {}: skipping multiword token range {:?}",
                line_number,
                id_column
            );
            return Ok(());
        }
        if id_column.contains('.') {
            log::warn!("line {}: skipping empty node {:?}", line_number, id_column);
            return Ok(());
        }
        let index: usize = id_column.parse().map_err(|_| AnnotationError::Conllu {
            line: line_number,
            message: format!("invalid token id {:?}", id_column),
        })?;
        if index != self.tokens.len() + 1 {
            return Err(AnnotationError::Conllu {
                line: line_number,
                message: format!(
                    "token id {} out of sequence, expected {}",
                    index,
                    self.tokens.len() + 1
                ),
            });
        }

        let form = columns[1];
        let lemma = match columns[2] {
            "_" => None,
            lemma => Some(lemma.to_string()),
        };
        // Prefer language-specific XPOS; fall back to UPOS when absent.
        let pos = match (columns[4], columns[3]) {
            ("_", upos) => upos,
            (xpos, _) => xpos,
        };

        if self.pending_space {
            self.text.push(' ');
        }
        let offset_start = self.text.len();
        self.text.push_str(form);
        let offset_end = self.text.len();
        self.pending_space = !columns[9].split('|').any(|attr| attr == "SpaceAfter=No");

        self.tokens.push(Token {
            index,
            text: form.to_string(),
            pos: pos.to_string(),
            offset_start,
            offset_end,
            lemma,
        });

        if columns[6] != "_" {
            let head: usize = columns[6].parse().map_err(|_| AnnotationError::Conllu {
                line: line_number,
                message: format!("invalid head {:?}", columns[6]),
            })?;
            self.push_arc(head, index, columns[7]);
        }
        if columns[8] != "_" {
            for entry in columns[8].split('|') {
                let Some((head, label)) = entry.split_once(':') else {
                    return Err(AnnotationError::Conllu {
                        line: line_number,
                        message: format!("malformed DEPS entry {:?}", entry),
                    });
                };
                let Ok(head) = head.parse::<usize>() else {
                    log::warn!(
                        "line {}: skipping DEPS entry {:?} with non-integer head",
                        line_number,
                        entry
                    );
                    continue;
                };
                self.push_arc(head, index, label);
            }
        }
        Ok(())
    }

    fn push_arc(&mut self, head: usize, dependent: usize, raw_label: &str) {
        if self
            .seen_arcs
            .insert((head, dependent, raw_label.to_string()))
        {
            self.arcs
                .push(DependencyArc::new(head, dependent, raw_label));
        }
    }

    fn finish(self, ordinal: i64) -> Result<Option<Sentence>, AnnotationError> {
        if !self.saw_content || self.tokens.is_empty() {
            return Ok(None);
        }
        let sentence = Sentence {
            id: self.sent_id.unwrap_or(ordinal),
            text: self.text,
            tokens: self.tokens,
            arcs: self.arcs,
        };
        sentence.validate()?;
        Ok(Some(sentence))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "\
# sent_id = 7
1\tIt\tit\tPRON\tPRP\t_\t2\tnsubj\t2:nsubj\t_
2\tworks\twork\tVERB\tVBZ\t_\t0\troot\t0:root\tSpaceAfter=No
3\t.\t.\tPUNCT\t.\t_\t2\tpunct\t2:punct\t_
";

    #[test]
    fn parses_minimal_sentence() {
        let sentences = parse_conllu(TINY).unwrap();
        assert_eq!(sentences.len(), 1);
        let s = &sentences[0];
        assert_eq!(s.id, 7);
        assert_eq!(s.text, "It works.");
        assert_eq!(s.tokens.len(), 3);
        assert_eq!(s.tokens[0].pos, "PRP");
        assert_eq!(s.tokens[0].lemma.as_deref(), Some("it"));
        assert_eq!((s.tokens[1].offset_start, s.tokens[1].offset_end), (3, 8));
        assert_eq!((s.tokens[2].offset_start, s.tokens[2].offset_end), (8, 9));
        // basic and enhanced arcs coincide here, so each survives once
        assert_eq!(s.arcs.len(), 3);
        assert_eq!(s.arcs[0], DependencyArc::new(2, 1, "nsubj"));
    }

    #[test]
    fn enhanced_deps_add_arcs_and_split_on_first_colon() {
        let input = "\
1\tSamples\tsample\tNOUN\tNNS\t_\t2\tnsubjpass\t2:nsubjpass|4:nsubjpass\t_
2\tfixed\tfix\tVERB\tVBN\t_\t0\troot\t0:root\t_
3\tand\tand\tCCONJ\tCC\t_\t2\tcc\t2:cc\t_
4\tstained\tstain\tVERB\tVBN\t_\t2\tconj\t2:conj:and\t_
";
        let sentences = parse_conllu(input).unwrap();
        let s = &sentences[0];
        assert_eq!(s.id, 1); // ordinal fallback
        let enhanced = s
            .arcs
            .iter()
            .find(|a| a.raw_label == "conj:and")
            .expect("enhanced conj arc");
        assert_eq!(enhanced.base_type, "conj");
        assert_eq!(enhanced.connector.as_deref(), Some("and"));
        // token 1 keeps both nsubjpass heads
        let heads: Vec<usize> = s
            .arcs
            .iter()
            .filter(|a| a.dependent == 1)
            .map(|a| a.head)
            .collect();
        assert_eq!(heads, vec![2, 4]);
        // the basic `conj` arc and enhanced `conj:and` arc are distinct
        assert!(s
            .arcs
            .iter()
            .any(|a| a.raw_label == "conj" && a.dependent == 4));
    }

    #[test]
    fn duplicate_arcs_collapse() {
        let input = "1\tx\t_\tNOUN\tNN\t_\t0\troot\t0:root|0:root\t_\n";
        let sentences = parse_conllu(input).unwrap();
        assert_eq!(sentences[0].arcs.len(), 1);
    }

    #[test]
    fn wrong_column_count_reports_line_number() {
        let input = "1\tIt\tit\tPRON\tPRP\t_\t2\tnsubj\t_\t_\n1\tbad\tline\n";
        let err = parse_conllu(input).unwrap_err();
        match err {
            AnnotationError::Conllu { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("columns"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn multiword_ranges_and_empty_nodes_are_skipped() {
        let input = "\
1-2\tdoesn't\t_\t_\t_\t_\t_\t_\t_\t_
1\tdoes\tdo\tVERB\tVBZ\t_\t0\troot\t_\tSpaceAfter=No
2\tn't\tnot\tPART\tRB\t_\t1\tneg\t_\t_
2.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_
";
        let sentences = parse_conllu(input).unwrap();
        let s = &sentences[0];
        assert_eq!(s.tokens.len(), 2);
        assert_eq!(s.text, "doesn't");
        assert_eq!(s.tokens[1].offset_start, 4);
    }

    #[test]
    fn blank_lines_separate_sentences_and_ordinals_count_up() {
        let line = "1\tHi\t_\tINTJ\tUH\t_\t0\troot\t_\t_\n";
        let input = format!("{line}\n{line}\n\n{line}");
        let sentences = parse_conllu(&input).unwrap();
        assert_eq!(sentences.len(), 3);
        assert_eq!(
            sentences.iter().map(|s| s.id).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
    }

    #[test]
    fn xpos_falls_back_to_upos() {
        let input = "1\tHi\t_\tINTJ\t_\t_\t0\troot\t_\t_\n";
        let sentences = parse_conllu(input).unwrap();
        assert_eq!(sentences[0].tokens[0].pos, "INTJ");
    }

    #[test]
    fn space_after_no_tightens_offsets() {
        let input = "\
1\t10\t_\tNUM\tCD\t_\t2\tnummod\t_\tSpaceAfter=No
2\t%\t_\tSYM\tNN\t_\t0\troot\t_\t_
";
        let sentences = parse_conllu(input).unwrap();
        let s = &sentences[0];
        assert_eq!(s.text, "10%");
        assert_eq!((s.tokens[1].offset_start, s.tokens[1].offset_end), (2, 3));
    }
}
