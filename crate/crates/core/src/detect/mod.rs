//! Detectors, procedures (detector × corpus type), the timed detection loop
//! and the completeness audit.

mod adapter;
mod ngram;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpora::{CorpusDocument, CorpusType};

pub use adapter::{
    parse_handshake, parse_request, parse_response, ExternalDetector, Handshake, Request, Response,
};
pub use ngram::{extract_ngrams, ngram_detect, normalize_text, train_ngram_model, NgramError, NgramModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("detector returned an empty language for record {record_id:?}")]
    EmptyPrediction { record_id: String },
    #[error("detector failed on record {record_id:?}: {reason}")]
    Failure { record_id: String, reason: String },
    #[error("adapter {detector:?}: {reason}")]
    Protocol { detector: String, reason: String },
    #[error("detector returned {got} predictions for {expected} documents")]
    CountMismatch { expected: usize, got: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("corpus mixes corpus types")]
    MixedCorpus,
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error("duplicate detector name {0:?}")]
    DuplicateName(String),
}

/// Raw output of a detector for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDetection {
    pub lang: String,
    pub conf: Option<f64>,
}

/// A loaded detector ready to process one corpus.
pub trait DetectionSession {
    /// Detects every document, returning outputs in document order.
    fn detect_all(self: Box<Self>, docs: &[CorpusDocument]) -> Result<Vec<RawDetection>, DetectError>;
}

pub trait Detector: Send + Sync {
    /// Loads the detector. Load time is not part of the measured time.
    fn open(&self) -> Result<Box<dyn DetectionSession + '_>, DetectError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Builtin,
    External,
}

#[derive(Clone)]
pub struct DetectorHandle {
    pub name: String,
    pub kind: DetectorKind,
    pub declared_languages: Option<BTreeSet<String>>,
    detector: Arc<dyn Detector>,
}

impl fmt::Debug for DetectorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DetectorHandle")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("declared_languages", &self.declared_languages)
            .finish()
    }
}

impl DetectorHandle {
    pub fn new(
        name: impl Into<String>,
        kind: DetectorKind,
        declared_languages: Option<BTreeSet<String>>,
        detector: Arc<dyn Detector>,
    ) -> Self {
        Self {
            name: name.into(),
            kind,
            declared_languages,
            detector,
        }
    }

    pub fn builtin(name: impl Into<String>, model: NgramModel) -> Self {
        let langs = model.languages().iter().cloned().collect();
        Self::new(name, DetectorKind::Builtin, Some(langs), Arc::new(model))
    }

    /// Starts the adapter once to read its handshake, then wraps it.
    pub fn external(name: impl Into<String>, command: impl Into<String>) -> Result<Self, DetectError> {
        let name = name.into();
        let det = ExternalDetector::new(name.clone(), command);
        let handshake = det.probe()?;
        let langs = handshake.languages.map(|l| l.into_iter().collect());
        Ok(Self::new(name, DetectorKind::External, langs, Arc::new(det)))
    }

    pub fn detector(&self) -> &dyn Detector {
        self.detector.as_ref()
    }
}

/// A unique (detector, corpus type) combination.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProcedureId {
    pub detector: String,
    pub corpus_type: CorpusType,
}

impl ProcedureId {
    pub fn new(detector: impl Into<String>, corpus_type: CorpusType) -> Self {
        Self {
            detector: detector.into(),
            corpus_type,
        }
    }
}

impl fmt::Display for ProcedureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.detector, self.corpus_type)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub record_id: String,
    pub procedure: ProcedureId,
    pub raw_language: String,
    pub confidence: Option<f64>,
}

/// Detectors under evaluation, keyed by unique name.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    detectors: Vec<DetectorHandle>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, handle: DetectorHandle) -> Result<(), DetectError> {
        if self.detectors.iter().any(|d| d.name == handle.name) {
            return Err(DetectError::DuplicateName(handle.name));
        }
        self.detectors.push(handle);
        Ok(())
    }

    pub fn detectors(&self) -> &[DetectorHandle] {
        &self.detectors
    }

    pub fn len(&self) -> usize {
        self.detectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty()
    }

    /// Drops the named detector; returns whether it was present.
    pub fn exclude(&mut self, name: &str) -> bool {
        let before = self.detectors.len();
        self.detectors.retain(|d| d.name != name);
        before != self.detectors.len()
    }

    /// Every detector crossed with every corpus type: `4 · d` procedures.
    pub fn procedures(&self) -> Vec<ProcedureId> {
        self.detectors
            .iter()
            .flat_map(|d| CorpusType::ALL.into_iter().map(|c| ProcedureId::new(d.name.clone(), c)))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ProcedureRun {
    pub predictions: Vec<Prediction>,
    pub elapsed_seconds: f64,
}

/// Runs one detector over a complete corpus. Only the detection loop is
/// timed; loading the detector happens before the clock starts.
pub fn run_procedure(detector: &DetectorHandle, corpus: &[CorpusDocument]) -> Result<ProcedureRun, DetectError> {
    let corpus_type = corpus.first().ok_or(DetectError::EmptyCorpus)?.corpus_type;
    if corpus.iter().any(|d| d.corpus_type != corpus_type) {
        return Err(DetectError::MixedCorpus);
    }
    let session = detector.detector.open()?;
    let start = Instant::now();
    let outputs = session.detect_all(corpus)?;
    let elapsed_seconds = start.elapsed().as_secs_f64();

    if outputs.len() != corpus.len() {
        return Err(DetectError::CountMismatch {
            expected: corpus.len(),
            got: outputs.len(),
        });
    }
    let procedure = ProcedureId::new(detector.name.clone(), corpus_type);
    let predictions = corpus
        .iter()
        .zip(outputs)
        .map(|(doc, out)| {
            if out.lang.trim().is_empty() {
                return Err(DetectError::EmptyPrediction {
                    record_id: doc.record_id.clone(),
                });
            }
            Ok(Prediction {
                record_id: doc.record_id.clone(),
                procedure: procedure.clone(),
                raw_language: out.lang,
                confidence: out.conf,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProcedureRun {
        predictions,
        elapsed_seconds,
    })
}

/// Minimum wall-clock time over `repeats` runs of the detection loop.
pub fn measure_time(detector: &DetectorHandle, corpus: &[CorpusDocument], repeats: usize) -> Result<f64, DetectError> {
    Ok(run_repeated(detector, corpus, repeats)?.elapsed_seconds)
}

/// Like [`measure_time`], also keeping the predictions of the first run.
pub fn run_repeated(
    detector: &DetectorHandle,
    corpus: &[CorpusDocument],
    repeats: usize,
) -> Result<ProcedureRun, DetectError> {
    if repeats == 0 {
        return Err(DetectError::NoRepeats);
    }
    let mut first = run_procedure(detector, corpus)?;
    for _ in 1..repeats {
        let again = run_procedure(detector, corpus)?;
        first.elapsed_seconds = first.elapsed_seconds.min(again.elapsed_seconds);
    }
    Ok(first)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletenessFailure {
    pub corpus_type: CorpusType,
    pub error: DetectError,
}

#[derive(Debug, Clone)]
pub struct CompletenessReport {
    pub complete: bool,
    pub failures: Vec<CompletenessFailure>,
    /// Successful runs, by corpus type.
    pub runs: BTreeMap<CorpusType, ProcedureRun>,
}

/// Runs the detector on every corpus; failures are collected, never raised.
pub fn audit_completeness(detector: &DetectorHandle, corpora: &[Vec<CorpusDocument>]) -> CompletenessReport {
    audit_with_repeats(detector, corpora, 1)
}

pub fn audit_with_repeats(detector: &DetectorHandle, corpora: &[Vec<CorpusDocument>], repeats: usize) -> CompletenessReport {
    let mut failures = Vec::new();
    let mut runs = BTreeMap::new();
    for corpus in corpora {
        let Some(corpus_type) = corpus.first().map(|d| d.corpus_type) else {
            continue;
        };
        match run_repeated(detector, corpus, repeats) {
            Ok(run) => {
                runs.insert(corpus_type, run);
            }
            Err(error) => failures.push(CompletenessFailure { corpus_type, error }),
        }
    }
    CompletenessReport {
        complete: failures.is_empty() && !runs.is_empty(),
        failures,
        runs,
    }
}
