//! Character n-gram Naive Bayes reference detector.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use super::{DetectError, DetectionSession, Detector, RawDetection};
use crate::corpora::CorpusDocument;

pub const MAX_N: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NgramError {
    #[error("no seed texts")]
    NoSeeds,
    #[error("language {0:?} has no non-empty seed text")]
    EmptyLanguage(String),
    #[error("invalid n-gram range ({0}, {1}); need 1 <= lo <= hi <= {MAX_N}")]
    BadRange(usize, usize),
    #[error("text yields no n-grams")]
    NoNgrams,
}

/// Trained model. Languages are kept sorted by code, so index order is also
/// the tie-breaking order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramModel {
    n_range: (usize, usize),
    languages: Vec<String>,
    log_priors: Vec<f64>,
    /// n-gram → per-language log likelihood, indexed like `languages`.
    log_likelihoods: BTreeMap<String, Vec<f64>>,
}

/// NFC, lowercase, whitespace runs collapsed to one space, trimmed.
pub fn normalize_text(text: &str) -> String {
    let nfc: String = text.nfc().flat_map(char::to_lowercase).collect();
    nfc.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// All character n-grams of normalized text for every n in the range.
pub fn extract_ngrams(normalized: &str, n_range: (usize, usize)) -> Vec<String> {
    let chars: Vec<char> = normalized.chars().collect();
    let mut out = Vec::new();
    for n in n_range.0..=n_range.1 {
        if n == 0 || n > chars.len() {
            continue;
        }
        out.extend(chars.windows(n).map(|w| w.iter().collect::<String>()));
    }
    out
}

fn check_range((lo, hi): (usize, usize)) -> Result<(), NgramError> {
    if lo >= 1 && lo <= hi && hi <= MAX_N {
        Ok(())
    } else {
        Err(NgramError::BadRange(lo, hi))
    }
}

/// Multinomial Naive Bayes with add-one smoothing over the union vocabulary.
/// Priors are proportional to the number of non-empty seed texts.
pub fn train_ngram_model(
    seed_texts: &BTreeMap<String, Vec<String>>,
    n_range: (usize, usize),
) -> Result<NgramModel, NgramError> {
    check_range(n_range)?;
    if seed_texts.is_empty() {
        return Err(NgramError::NoSeeds);
    }
    let languages: Vec<String> = seed_texts.keys().cloned().collect();
    let mut doc_counts = Vec::with_capacity(languages.len());
    let mut per_lang: Vec<HashMap<String, u64>> = Vec::with_capacity(languages.len());
    for (lang, texts) in seed_texts {
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut docs = 0u64;
        for text in texts {
            let grams = extract_ngrams(&normalize_text(text), n_range);
            if grams.is_empty() {
                continue;
            }
            docs += 1;
            for g in grams {
                *counts.entry(g).or_default() += 1;
            }
        }
        if docs == 0 {
            return Err(NgramError::EmptyLanguage(lang.clone()));
        }
        doc_counts.push(docs);
        per_lang.push(counts);
    }

    let mut vocab: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for counts in &per_lang {
        for g in counts.keys() {
            vocab.entry(g.clone()).or_default();
        }
    }
    let vocab_size = vocab.len() as f64;
    let totals: Vec<f64> = per_lang.iter().map(|c| c.values().sum::<u64>() as f64).collect();
    for (gram, row) in vocab.iter_mut() {
        *row = per_lang
            .iter()
            .zip(&totals)
            .map(|(counts, total)| {
                let c = counts.get(gram).copied().unwrap_or(0) as f64;
                ((c + 1.0) / (total + vocab_size)).ln()
            })
            .collect();
    }
    let total_docs: u64 = doc_counts.iter().sum();
    let log_priors = doc_counts
        .iter()
        .map(|&d| (d as f64 / total_docs as f64).ln())
        .collect();
    Ok(NgramModel {
        n_range,
        languages,
        log_priors,
        log_likelihoods: vocab,
    })
}

impl NgramModel {
    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn n_range(&self) -> (usize, usize) {
        self.n_range
    }

    pub fn vocabulary_size(&self) -> usize {
        self.log_likelihoods.len()
    }

    /// Normalized posterior over languages (index order of [`languages`]).
    /// n-grams outside the training vocabulary are ignored.
    ///
    /// [`languages`]: NgramModel::languages
    pub fn posterior(&self, text: &str) -> Result<Vec<f64>, NgramError> {
        let grams = extract_ngrams(&normalize_text(text), self.n_range);
        if grams.is_empty() {
            return Err(NgramError::NoNgrams);
        }
        let mut scores = self.log_priors.clone();
        for g in &grams {
            if let Some(row) = self.log_likelihoods.get(g) {
                for (s, l) in scores.iter_mut().zip(row) {
                    *s += l;
                }
            }
        }
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= z);
        Ok(probs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let model: NgramModel = serde_json::from_str(text)?;
        let n = model.languages.len();
        let consistent = n > 0
            && model.log_priors.len() == n
            && model.log_likelihoods.values().all(|row| row.len() == n)
            && check_range(model.n_range).is_ok();
        if !consistent {
            return Err(serde::de::Error::custom("inconsistent n-gram model dimensions"));
        }
        Ok(model)
    }
}

/// Most probable language and its posterior. Ties go to the
/// lexicographically smallest code.
pub fn ngram_detect(model: &NgramModel, text: &str) -> Result<(String, f64), NgramError> {
    let probs = model.posterior(text)?;
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    Ok((model.languages[best].clone(), probs[best]))
}

struct NgramSession<'a>(&'a NgramModel);

impl DetectionSession for NgramSession<'_> {
    fn detect_all(self: Box<Self>, docs: &[CorpusDocument]) -> Result<Vec<RawDetection>, DetectError> {
        docs.iter()
            .map(|doc| {
                ngram_detect(self.0, &doc.text)
                    .map(|(lang, conf)| RawDetection { lang, conf: Some(conf) })
                    .map_err(|e| DetectError::Failure {
                        record_id: doc.record_id.clone(),
                        reason: e.to_string(),
                    })
            })
            .collect()
    }
}

impl Detector for NgramModel {
    fn open(&self) -> Result<Box<dyn DetectionSession + '_>, DetectError> {
        Ok(Box::new(NgramSession(self)))
    }
}
