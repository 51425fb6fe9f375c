//! The four metadata corpora built from annotated records.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::{find_duplicate_id, AnnotatedRecord};

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("cannot terminate an empty attribute")]
    EmptyAttribute,
    #[error("empty record set")]
    NoRecords,
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("unknown corpus type {0:?}")]
    UnknownType(String),
}

/// Which attributes feed a detector. Declaration order is the complexity
/// order used for tie-breaking: titles, then journal names, then abstracts,
/// then everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CorpusType {
    #[serde(rename = "T")]
    Titles,
    #[serde(rename = "J")]
    TitlesJournals,
    #[serde(rename = "A")]
    TitlesAbstracts,
    #[serde(rename = "G")]
    Greedy,
}

impl CorpusType {
    /// Report order (T, A, J, G) as laid out in the timing tables.
    pub const ALL: [CorpusType; 4] = [Self::Titles, Self::TitlesAbstracts, Self::TitlesJournals, Self::Greedy];

    pub fn label(self) -> &'static str {
        match self {
            Self::Titles => "T",
            Self::TitlesAbstracts => "A",
            Self::TitlesJournals => "J",
            Self::Greedy => "G",
        }
    }

    fn includes_abstract(self) -> bool {
        matches!(self, Self::TitlesAbstracts | Self::Greedy)
    }

    fn includes_journal(self) -> bool {
        matches!(self, Self::TitlesJournals | Self::Greedy)
    }
}

impl fmt::Display for CorpusType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CorpusType {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| CorpusError::UnknownType(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub record_id: String,
    pub corpus_type: CorpusType,
    pub text: String,
}

const TERMINATORS: [char; 6] = ['.', '!', '?', '。', '！', '？'];

/// Strips trailing whitespace and appends a period unless the text already
/// ends with a sentence terminator.
pub fn terminate_sentence(text: &str) -> Result<String, CorpusError> {
    let trimmed = text.trim_end();
    if trimmed.trim_start().is_empty() {
        return Err(CorpusError::EmptyAttribute);
    }
    let mut out = trimmed.to_string();
    if !trimmed.ends_with(TERMINATORS) {
        out.push('.');
    }
    Ok(out)
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn segment(attr: &str) -> Result<String, CorpusError> {
    terminate_sentence(&collapse_whitespace(attr))
}

pub fn build_document(record: &AnnotatedRecord, corpus_type: CorpusType) -> Result<CorpusDocument, CorpusError> {
    let mut parts = vec![segment(record.title())?];
    if corpus_type.includes_abstract() {
        if let Some(a) = record.abstract_text() {
            parts.push(segment(a)?);
        }
    }
    if corpus_type.includes_journal() {
        if let Some(j) = record.journal_name() {
            parts.push(segment(j)?);
        }
    }
    Ok(CorpusDocument {
        record_id: record.id().to_string(),
        corpus_type,
        text: parts.join(" "),
    })
}

/// One document per record, in record order.
pub fn build_corpus(records: &[AnnotatedRecord], corpus_type: CorpusType) -> Result<Vec<CorpusDocument>, CorpusError> {
    if records.is_empty() {
        return Err(CorpusError::NoRecords);
    }
    if let Some(dup) = find_duplicate_id(records) {
        return Err(CorpusError::DuplicateId(dup.to_string()));
    }
    records.iter().map(|r| build_document(r, corpus_type)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub mean_chars: f64,
    pub min_chars: usize,
    pub max_chars: usize,
}

/// Lengths are counted in Unicode scalar values.
pub fn corpus_stats(corpus: &[CorpusDocument]) -> Result<CorpusStats, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let lens: Vec<usize> = corpus.iter().map(|d| d.text.chars().count()).collect();
    Ok(CorpusStats {
        doc_count: lens.len(),
        mean_chars: lens.iter().sum::<usize>() as f64 / lens.len() as f64,
        min_chars: *lens.iter().min().unwrap(),
        max_chars: *lens.iter().max().unwrap(),
    })
}

/// JSON Lines audit dump of a corpus.
pub fn write_corpus_dump(corpus: &[CorpusDocument]) -> Vec<u8> {
    let mut out = Vec::new();
    for doc in corpus {
        serde_json::to_writer(&mut out, doc).expect("document serializes");
        out.push(b'\n');
    }
    out
}

pub fn read_corpus_dump(text: &str) -> Result<Vec<CorpusDocument>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
