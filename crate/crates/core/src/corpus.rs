//! Task TSV splits: parsing, validation and class statistics.
//!
//! Files are UTF-8 with a literal header line `sentence_id<TAB>sentence<TAB>label`
//! followed by one sentence per row. LF line endings, with or without a
//! trailing newline; a trailing CR on any line is stripped.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TSV_HEADER: &str = "sentence_id\tsentence\tlabel";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "OBJ")]
    Obj,
    #[serde(rename = "SUBJ")]
    Subj,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Obj, Label::Subj];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Obj => "OBJ",
            Label::Subj => "SUBJ",
        }
    }

    pub fn opposite(self) -> Label {
        match self {
            Label::Obj => Label::Subj,
            Label::Subj => Label::Obj,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown label {0:?} (expected OBJ or SUBJ)")]
pub struct UnknownLabel(pub String);

impl FromStr for Label {
    type Err = UnknownLabel;

    /// Case-sensitive: `obj` is rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "OBJ" => Ok(Label::Obj),
            "SUBJ" => Ok(Label::Subj),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub sentence_id: String,
    pub text: String,
    pub label: Label,
}

impl LabeledSentence {
    pub fn new(sentence_id: impl Into<String>, text: impl Into<String>, label: Label) -> Self {
        Self {
            sentence_id: sentence_id.into(),
            text: text.into(),
            label,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitStats {
    pub count_obj: usize,
    pub count_subj: usize,
}

impl SplitStats {
    pub fn total(&self) -> usize {
        self.count_obj + self.count_subj
    }

    pub fn count(&self, label: Label) -> usize {
        match label {
            Label::Obj => self.count_obj,
            Label::Subj => self.count_subj,
        }
    }
}

impl fmt::Display for SplitStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OBJ {} / SUBJ {}", self.count_obj, self.count_subj)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("line {line}: input is not valid UTF-8")]
    NotUtf8 { line: usize },
    #[error("missing header line (expected {expected:?})")]
    MissingHeader { expected: &'static str },
    #[error("line 1: unexpected header {found:?} (expected {expected:?})")]
    BadHeader {
        found: String,
        expected: &'static str,
    },
    #[error("line {line}: expected 3 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: {source}")]
    UnknownLabel { line: usize, source: UnknownLabel },
    #[error("line {line}: empty sentence_id")]
    EmptyId { line: usize },
    #[error("line {line}: empty sentence text")]
    EmptyText { line: usize },
    #[error("line {line}: duplicate sentence_id {id:?} (first seen on line {first})")]
    DuplicateId {
        line: usize,
        id: String,
        first: usize,
    },
    #[error("sentence {id:?}: text contains a tab or newline and cannot be written as TSV")]
    Unwritable { id: String },
}

/// Parses a split. Rows keep file order; sentence text is trimmed.
pub fn parse_tsv(raw: &[u8]) -> Result<Vec<LabeledSentence>, CorpusError> {
    let text = std::str::from_utf8(raw).map_err(|e| {
        let line = raw[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        CorpusError::NotUtf8 { line }
    })?;

    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.len() > 1 && lines.last() == Some(&"") {
        lines.pop();
    }

    let mut iter = lines.into_iter().map(strip_cr).enumerate();
    match iter.next() {
        None => {
            return Err(CorpusError::MissingHeader {
                expected: TSV_HEADER,
            })
        }
        Some((_, "")) if text.is_empty() => {
            return Err(CorpusError::MissingHeader {
                expected: TSV_HEADER,
            })
        }
        Some((_, header)) if header != TSV_HEADER => {
            return Err(CorpusError::BadHeader {
                found: header.to_string(),
                expected: TSV_HEADER,
            })
        }
        Some(_) => {}
    }

    let mut rows = Vec::new();
    let mut seen: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for (idx, line) in iter {
        let line_no = idx + 1;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(CorpusError::ColumnCount {
                line: line_no,
                found: cols.len(),
            });
        }
        let id = cols[0].trim();
        if id.is_empty() {
            return Err(CorpusError::EmptyId { line: line_no });
        }
        let sentence = cols[1].trim();
        if sentence.is_empty() {
            return Err(CorpusError::EmptyText { line: line_no });
        }
        let label = cols[2]
            .parse::<Label>()
            .map_err(|source| CorpusError::UnknownLabel {
                line: line_no,
                source,
            })?;
        if let Some(&first) = seen.get(id) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id: id.to_string(),
                first,
            });
        }
        seen.insert(id.to_string(), line_no);
        rows.push(LabeledSentence::new(id, sentence, label));
    }
    Ok(rows)
}

fn strip_cr(line: &str) -> &str {
    line.strip_suffix('\r').unwrap_or(line)
}

/// Serializes rows in the split format, header included, LF-terminated.
pub fn write_tsv(rows: &[LabeledSentence]) -> Result<String, CorpusError> {
    let mut out = String::with_capacity(64 + rows.len() * 96);
    out.push_str(TSV_HEADER);
    out.push('\n');
    for row in rows {
        if has_line_breaking(&row.sentence_id) || has_line_breaking(&row.text) {
            return Err(CorpusError::Unwritable {
                id: row.sentence_id.clone(),
            });
        }
        out.push_str(&row.sentence_id);
        out.push('\t');
        out.push_str(&row.text);
        out.push('\t');
        out.push_str(row.label.as_str());
        out.push('\n');
    }
    Ok(out)
}

fn has_line_breaking(s: &str) -> bool {
    s.contains(['\t', '\n', '\r'])
}

pub fn class_distribution(rows: &[LabeledSentence]) -> SplitStats {
    rows.iter().fold(SplitStats::default(), |mut acc, row| {
        match row.label {
            Label::Obj => acc.count_obj += 1,
            Label::Subj => acc.count_subj += 1,
        }
        acc
    })
}

/// Ids that occur more than once, in first-seen order.
pub fn duplicate_ids(rows: &[LabeledSentence]) -> Vec<&str> {
    let mut seen = HashSet::new();
    let mut dups = Vec::new();
    for row in rows {
        if !seen.insert(row.sentence_id.as_str()) && !dups.contains(&row.sentence_id.as_str()) {
            dups.push(row.sentence_id.as_str());
        }
    }
    dups
}
