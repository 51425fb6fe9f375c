//! Annotated article records, language categories, metadata configurations
//! and database-level subgroup weights.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::csv_rows;

#[derive(Debug, Error, PartialEq)]
pub enum RecordsError {
    #[error("input is not valid UTF-8: {0}")]
    Encoding(String),
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("record {id:?} (line {line}): title is empty")]
    EmptyTitle { id: String, line: u64 },
    #[error("line {line}: negative count {count} for ({language}, {config})")]
    NegativeCount {
        line: u64,
        language: String,
        config: String,
        count: i64,
    },
    #[error("line {line}: duplicate weight row for ({language}, {config})")]
    DuplicateKey {
        line: u64,
        language: LanguageCategory,
        config: MetadataConfig,
    },
    #[error("weights contain no positive count")]
    NoPositiveCount,
    #[error("unknown metadata configuration {0:?}")]
    UnknownConfig(String),
    #[error("unknown language category {0:?}")]
    UnknownLanguage(String),
}

/// The twelve language categories: eleven named languages plus `other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguageCategory {
    De,
    En,
    Es,
    Fr,
    Id,
    It,
    Ja,
    Ko,
    Pt,
    Ru,
    Zh,
    Other,
}

impl LanguageCategory {
    pub const ALL: [LanguageCategory; 12] = [
        Self::De,
        Self::En,
        Self::Es,
        Self::Fr,
        Self::Id,
        Self::It,
        Self::Ja,
        Self::Ko,
        Self::Pt,
        Self::Ru,
        Self::Zh,
        Self::Other,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Self::De => "de",
            Self::En => "en",
            Self::Es => "es",
            Self::Fr => "fr",
            Self::Id => "id",
            Self::It => "it",
            Self::Ja => "ja",
            Self::Ko => "ko",
            Self::Pt => "pt",
            Self::Ru => "ru",
            Self::Zh => "zh",
            Self::Other => "other",
        }
    }

    /// Strict parse of a category label (`de` … `zh`, `other`). Unlike
    /// [`map_language`], anything else is rejected.
    pub fn from_label(label: &str) -> Option<Self> {
        let label = label.trim().to_ascii_lowercase();
        Self::ALL.into_iter().find(|l| l.code() == label)
    }
}

impl fmt::Display for LanguageCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Maps a raw ISO-639-1 code onto the closed category set. Total: any code
/// outside the eleven named languages becomes `other`.
pub fn map_language(raw_code: &str) -> LanguageCategory {
    let code = raw_code.trim().to_ascii_lowercase();
    LanguageCategory::ALL[..11]
        .iter()
        .copied()
        .find(|l| l.code() == code)
        .unwrap_or(LanguageCategory::Other)
}

/// Which optional text attributes a record carries besides its title.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MetadataConfig {
    TitleOnly,
    TitleAbstract,
    TitleJournal,
    TitleAbstractJournal,
}

impl MetadataConfig {
    pub const ALL: [MetadataConfig; 4] = [
        Self::TitleOnly,
        Self::TitleAbstract,
        Self::TitleJournal,
        Self::TitleAbstractJournal,
    ];

    /// Short label used in weights and report files.
    pub fn label(self) -> &'static str {
        match self {
            Self::TitleOnly => "T",
            Self::TitleAbstract => "TA",
            Self::TitleJournal => "TJ",
            Self::TitleAbstractJournal => "TAJ",
        }
    }
}

impl fmt::Display for MetadataConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MetadataConfig {
    type Err = RecordsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| RecordsError::UnknownConfig(s.to_string()))
    }
}

impl FromStr for LanguageCategory {
    type Err = RecordsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_label(s).ok_or_else(|| RecordsError::UnknownLanguage(s.to_string()))
    }
}

/// A (language, metadata configuration) cell of the database.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubgroupKey {
    pub language: LanguageCategory,
    pub config: MetadataConfig,
}

impl SubgroupKey {
    pub fn new(language: LanguageCategory, config: MetadataConfig) -> Self {
        Self { language, config }
    }

    /// All 48 keys, language-major.
    pub fn all() -> impl Iterator<Item = SubgroupKey> {
        LanguageCategory::ALL.into_iter().flat_map(|language| {
            MetadataConfig::ALL
                .into_iter()
                .map(move |config| SubgroupKey { language, config })
        })
    }
}

impl fmt::Display for SubgroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.language, self.config)
    }
}

/// One sampled and annotated article.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedRecord {
    id: String,
    title: String,
    abstract_text: Option<String>,
    journal_name: Option<String>,
    true_language: LanguageCategory,
    raw_language_code: Option<String>,
}

fn present(attr: Option<String>) -> Option<String> {
    attr.filter(|s| !s.trim().is_empty())
}

impl AnnotatedRecord {
    /// Builds a validated record. Whitespace-only optional attributes are
    /// stored as absent.
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        abstract_text: Option<String>,
        journal_name: Option<String>,
        raw_language: &str,
    ) -> Result<Self, RecordsError> {
        let id = id.into();
        let title = title.into();
        if title.trim().is_empty() {
            return Err(RecordsError::EmptyTitle { id, line: 0 });
        }
        Ok(Self {
            id,
            title,
            abstract_text: present(abstract_text),
            journal_name: present(journal_name),
            true_language: map_language(raw_language),
            raw_language_code: Some(raw_language.to_string()),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn abstract_text(&self) -> Option<&str> {
        self.abstract_text.as_deref()
    }

    pub fn journal_name(&self) -> Option<&str> {
        self.journal_name.as_deref()
    }

    pub fn true_language(&self) -> LanguageCategory {
        self.true_language
    }

    pub fn raw_language_code(&self) -> Option<&str> {
        self.raw_language_code.as_deref()
    }

    pub fn config(&self) -> MetadataConfig {
        classify_config(self)
    }

    pub fn subgroup(&self) -> SubgroupKey {
        SubgroupKey::new(self.true_language, self.config())
    }
}

pub fn classify_config(record: &AnnotatedRecord) -> MetadataConfig {
    let has = |a: Option<&str>| a.is_some_and(|s| !s.trim().is_empty());
    match (has(record.abstract_text()), has(record.journal_name())) {
        (false, false) => MetadataConfig::TitleOnly,
        (true, false) => MetadataConfig::TitleAbstract,
        (false, true) => MetadataConfig::TitleJournal,
        (true, true) => MetadataConfig::TitleAbstractJournal,
    }
}

/// On-disk shape shared by the JSON Lines and CSV record formats.
#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    id: Option<String>,
    title: Option<String>,
    #[serde(default, rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    journal_name: Option<String>,
    true_language: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Jsonl,
    Csv,
}

impl RecordFormat {
    /// Guesses the format from a file extension; anything but `.csv` is JSONL.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::Jsonl,
        }
    }
}

fn row_to_record(row: RecordRow, line: u64) -> Result<AnnotatedRecord, RecordsError> {
    let malformed = |reason: &str| RecordsError::Malformed {
        line,
        reason: reason.to_string(),
    };
    let id = row.id.ok_or_else(|| malformed("missing field `id`"))?;
    let title = row.title.ok_or_else(|| malformed("missing field `title`"))?;
    let lang = row
        .true_language
        .filter(|l| !l.trim().is_empty())
        .ok_or_else(|| malformed("missing field `true_language`"))?;
    AnnotatedRecord::new(id, title, row.abstract_text, row.journal_name, &lang).map_err(|e| match e {
        RecordsError::EmptyTitle { id, .. } => RecordsError::EmptyTitle { id, line },
        other => other,
    })
}

fn read_utf8(mut source: impl Read) -> Result<String, RecordsError> {
    let mut bytes = Vec::new();
    source
        .read_to_end(&mut bytes)
        .map_err(|e| RecordsError::Encoding(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| RecordsError::Encoding(e.to_string()))
}

/// Reads annotated records in input order. Blank JSONL lines are skipped.
pub fn ingest_records(source: impl Read, format: RecordFormat) -> Result<Vec<AnnotatedRecord>, RecordsError> {
    let text = read_utf8(source)?;
    match format {
        RecordFormat::Jsonl => parse_jsonl(&text),
        RecordFormat::Csv => parse_csv(&text),
    }
}

fn parse_jsonl(text: &str) -> Result<Vec<AnnotatedRecord>, RecordsError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row: RecordRow = serde_json::from_str(line).map_err(|e| RecordsError::Malformed {
            line: line_no,
            reason: e.to_string(),
        })?;
        out.push(row_to_record(row, line_no)?);
    }
    Ok(out)
}

fn parse_csv(text: &str) -> Result<Vec<AnnotatedRecord>, RecordsError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| RecordsError::Malformed { line: 1, reason: e.to_string() })?
        .clone();
    for required in ["id", "title", "true_language"] {
        if !headers.iter().any(|h| h == required) {
            return Err(RecordsError::Malformed {
                line: 1,
                reason: format!("missing column `{required}`"),
            });
        }
    }
    let rows = csv_rows::<RecordRow>(&mut reader).map_err(|(line, reason)| RecordsError::Malformed { line, reason })?;
    let mut out = Vec::new();
    for (line, row) in rows {
        // csv leaves empty cells as Some(""); those mean "absent"
        let row = RecordRow {
            title: Some(row.title.unwrap_or_default()),
            abstract_text: row.abstract_text.filter(|s| !s.is_empty()),
            journal_name: row.journal_name.filter(|s| !s.is_empty()),
            ..row
        };
        out.push(row_to_record(row, line)?);
    }
    Ok(out)
}

fn to_row(record: &AnnotatedRecord) -> RecordRow {
    RecordRow {
        id: Some(record.id.clone()),
        title: Some(record.title.clone()),
        abstract_text: record.abstract_text.clone(),
        journal_name: record.journal_name.clone(),
        true_language: Some(
            record
                .raw_language_code
                .clone()
                .unwrap_or_else(|| record.true_language.code().to_string()),
        ),
    }
}

/// Serializes records in the format [`ingest_records`] reads.
pub fn write_records(records: &[AnnotatedRecord], format: RecordFormat) -> Vec<u8> {
    match format {
        RecordFormat::Jsonl => {
            let mut out = Vec::new();
            for r in records {
                serde_json::to_writer(&mut out, &to_row(r)).expect("record serializes");
                out.push(b'\n');
            }
            out
        }
        RecordFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(to_row(r)).expect("record serializes");
            }
            w.into_inner().expect("in-memory writer")
        }
    }
}

/// Checks that record ids are unique, returning the first duplicate.
pub fn find_duplicate_id(records: &[AnnotatedRecord]) -> Option<&str> {
    let mut seen = HashSet::with_capacity(records.len());
    records.iter().map(|r| r.id()).find(|id| !seen.insert(*id))
}

/// Database article counts per subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatabaseWeights {
    counts: BTreeMap<SubgroupKey, u64>,
}

impl DatabaseWeights {
    pub fn new(counts: BTreeMap<SubgroupKey, u64>) -> Result<Self, RecordsError> {
        if !counts.values().any(|&n| n > 0) {
            return Err(RecordsError::NoPositiveCount);
        }
        Ok(Self { counts })
    }

    pub fn get(&self, key: &SubgroupKey) -> Option<u64> {
        self.counts.get(key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubgroupKey, u64)> + '_ {
        self.counts.iter().map(|(k, n)| (*k, *n))
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Result of [`load_weights`]: the weights plus what was dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedWeights {
    pub weights: DatabaseWeights,
    /// Rows whose language label is outside the twelve categories.
    pub dropped_rows: usize,
    pub dropped_total: u64,
}

#[derive(Debug, Deserialize)]
struct WeightRow {
    language: String,
    config: String,
    count: String,
}

/// Parses a `language,config,count` CSV. Counts may use space or `_` digit
/// grouping (`17 915 165`).
pub fn load_weights(source: impl Read) -> Result<LoadedWeights, RecordsError> {
    let text = read_utf8(source)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut counts = BTreeMap::new();
    let mut dropped_rows = 0;
    let mut dropped_total = 0u64;
    let rows = csv_rows::<WeightRow>(&mut reader).map_err(|(line, reason)| RecordsError::Malformed { line, reason })?;
    for (line, row) in rows {
        let digits: String = row.count.chars().filter(|c| !c.is_whitespace() && *c != '_').collect();
        let count: i64 = digits.parse().map_err(|_| RecordsError::Malformed {
            line,
            reason: format!("invalid count {:?}", row.count),
        })?;
        if count < 0 {
            return Err(RecordsError::NegativeCount {
                line,
                language: row.language,
                config: row.config,
                count,
            });
        }
        let count = count as u64;
        let config: MetadataConfig = row.config.parse().map_err(|_| RecordsError::Malformed {
            line,
            reason: format!("unknown config {:?}", row.config),
        })?;
        let Some(language) = LanguageCategory::from_label(&row.language) else {
            log::warn!("weights line {line}: dropping row with unmapped language {:?}", row.language);
            dropped_rows += 1;
            dropped_total += count;
            continue;
        };
        let key = SubgroupKey::new(language, config);
        if counts.insert(key, count).is_some() {
            return Err(RecordsError::DuplicateKey { line, language, config });
        }
    }
    Ok(LoadedWeights {
        weights: DatabaseWeights::new(counts)?,
        dropped_rows,
        dropped_total,
    })
}
