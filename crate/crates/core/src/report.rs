//! Tabular artifact formats. Every emitter has a matching parser.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpora::{CorpusStats, CorpusType};
use crate::detect::{Prediction, ProcedureId};
use crate::evaluate::{ConfusionCounts, Group, SpeedScores, TimingTable};
use crate::records::{LanguageCategory, MetadataConfig, SubgroupKey};
use crate::simulate::{best_by_detector, MapEstimate, SimulationResult};

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error("missing column {0:?}")]
    MissingColumn(String),
}

fn parse_err(line: u64, reason: impl Into<String>) -> ReportError {
    ReportError::Parse {
        line,
        reason: reason.into(),
    }
}

fn csv_err(e: csv::Error) -> ReportError {
    parse_err(e.position().map_or(0, |p| p.line()), e.to_string())
}

/// Deserializes CSV rows, pairing each with its 1-based line number.
pub(crate) fn csv_rows<T: serde::de::DeserializeOwned>(
    rdr: &mut csv::Reader<&[u8]>,
) -> Result<Vec<(u64, T)>, (u64, String)> {
    let headers = rdr.headers().map_err(|e| (0, e.to_string()))?.clone();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| (e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = rec.deserialize(Some(&headers)).map_err(|e| (line, e.to_string()))?;
        out.push((line, row));
    }
    Ok(out)
}

fn rows<T: serde::de::DeserializeOwned>(text: &str) -> Result<Vec<(u64, T)>, ReportError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    csv_rows(&mut rdr).map_err(|(line, reason)| parse_err(line, reason))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory writer")
}

fn parse_f64(s: &str, line: u64) -> Result<f64, ReportError> {
    let v: f64 = s.trim().parse().map_err(|_| parse_err(line, format!("invalid number {s:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err(line, format!("non-finite number {s:?}")))
    }
}

fn parse_corpus(s: &str, line: u64) -> Result<CorpusType, ReportError> {
    s.parse().map_err(|_| parse_err(line, format!("unknown corpus {s:?}")))
}

// ---- confusion counts ----

#[derive(Debug, Serialize, Deserialize)]
struct ConfusionRow {
    procedure: String,
    detector: String,
    corpus: String,
    language: String,
    config: String,
    tp: u64,
    fp: u64,
    #[serde(rename = "fn")]
    fn_: u64,
}

/// `procedure,detector,corpus,language,config,tp,fp,fn`; `config` is empty
/// for per-language counts.
pub fn write_confusions(counts: &[ConfusionCounts]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in counts {
        w.serialize(ConfusionRow {
            procedure: c.procedure.to_string(),
            detector: c.procedure.detector.clone(),
            corpus: c.procedure.corpus_type.label().into(),
            language: c.group.language().code().into(),
            config: c.group.config().map_or_else(String::new, |c| c.label().into()),
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
        })
        .expect("row serializes");
    }
    finish(w)
}

pub fn read_confusions(text: &str) -> Result<Vec<ConfusionCounts>, ReportError> {
    let mut out = Vec::new();
    for (line, row) in rows::<ConfusionRow>(text)? {
        let procedure = ProcedureId::new(row.detector, parse_corpus(&row.corpus, line)?);
        if procedure.to_string() != row.procedure {
            return Err(parse_err(line, format!("procedure {:?} disagrees with detector/corpus", row.procedure)));
        }
        let language = LanguageCategory::from_label(&row.language)
            .ok_or_else(|| parse_err(line, format!("unknown language {:?}", row.language)))?;
        let group = if row.config.is_empty() {
            Group::Language(language)
        } else {
            let config: MetadataConfig = row
                .config
                .parse()
                .map_err(|_| parse_err(line, format!("unknown config {:?}", row.config)))?;
            Group::Subgroup(SubgroupKey::new(language, config))
        };
        out.push(ConfusionCounts {
            procedure,
            group,
            tp: row.tp,
            fp: row.fp,
            fn_: row.fn_,
        });
    }
    Ok(out)
}

// ---- timings (rows = corpus type, columns = detector) ----

/// Detector columns keep first-seen order from the table's key order.
pub fn write_timings(table: &TimingTable, detectors: &[String]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["corpus".to_string()];
    header.extend(detectors.iter().cloned());
    w.write_record(&header).expect("header");
    for corpus in CorpusType::ALL {
        let mut row = vec![corpus.label().to_string()];
        for d in detectors {
            row.push(
                table
                    .get(&ProcedureId::new(d.clone(), corpus))
                    .map_or_else(String::new, |t| format!("{t:.2}")),
            );
        }
        w.write_record(&row).expect("row");
    }
    finish(w)
}

pub fn read_timings(text: &str) -> Result<TimingTable, ReportError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.get(0).map(str::trim) != Some("corpus") {
        return Err(ReportError::MissingColumn("corpus".into()));
    }
    let detectors: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
    if detectors.iter().collect::<BTreeSet<_>>().len() != detectors.len() {
        return Err(parse_err(1, "duplicate detector column"));
    }
    let mut table = TimingTable::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let corpus = parse_corpus(rec.get(0).unwrap_or(""), line)?;
        for (d, cell) in detectors.iter().zip(rec.iter().skip(1)) {
            if cell.trim().is_empty() {
                continue;
            }
            let key = ProcedureId::new(d.clone(), corpus);
            if table.insert(key, parse_f64(cell, line)?).is_some() {
                return Err(parse_err(line, format!("duplicate corpus row {corpus}")));
            }
        }
    }
    Ok(table)
}

// ---- speed scores ----

#[derive(Debug, Serialize, Deserialize)]
struct SpeedRow {
    detector: String,
    corpus: String,
    seconds: f64,
    speed: f64,
}

/// Full-precision companion of the timing table, consumed by the simulation.
pub fn write_speeds(table: &TimingTable, speeds: &SpeedScores) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (p, s) in speeds {
        w.serialize(SpeedRow {
            detector: p.detector.clone(),
            corpus: p.corpus_type.label().into(),
            seconds: table.get(p).copied().unwrap_or(f64::NAN),
            speed: *s,
        })
        .expect("row serializes");
    }
    finish(w)
}

pub fn read_speeds(text: &str) -> Result<(TimingTable, SpeedScores), ReportError> {
    let mut times = TimingTable::new();
    let mut speeds = SpeedScores::new();
    for (line, row) in rows::<SpeedRow>(text)? {
        let p = ProcedureId::new(row.detector, parse_corpus(&row.corpus, line)?);
        if !(row.speed > 0.0 && row.speed <= 1.0) {
            return Err(parse_err(line, format!("speed {} outside (0, 1]", row.speed)));
        }
        times.insert(p.clone(), row.seconds);
        if speeds.insert(p, row.speed).is_some() {
            return Err(parse_err(line, "duplicate procedure"));
        }
    }
    Ok((times, speeds))
}

// ---- MAP estimates ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRow {
    pub detector: String,
    pub corpus: CorpusType,
    pub beta: f64,
    pub gamma: f64,
    pub map_estimate: f64,
}

pub fn map_rows(results: &[SimulationResult]) -> Vec<MapRow> {
    results
        .iter()
        .flat_map(|r| {
            r.map_estimates.iter().map(|m: &MapEstimate| MapRow {
                detector: r.procedure.detector.clone(),
                corpus: r.procedure.corpus_type,
                beta: m.beta,
                gamma: m.gamma,
                map_estimate: m.map_estimate,
            })
        })
        .collect()
}

/// `detector,corpus,beta,gamma,map_estimate`
pub fn write_map_table(rows: &[MapRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    finish(w)
}

pub fn read_map_table(text: &str) -> Result<Vec<MapRow>, ReportError> {
    let mut out = Vec::new();
    for (line, row) in rows::<MapRow>(text)? {
        if ![row.beta, row.gamma, row.map_estimate].iter().all(|v| v.is_finite()) {
            return Err(parse_err(line, "non-finite value"));
        }
        out.push(row);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestRow {
    pub beta: f64,
    pub gamma: f64,
    pub detector: String,
    pub corpus: CorpusType,
    pub map_estimate: f64,
}

/// Best procedure per (β, γ, detector), computed from MAP rows alone.
/// Output is ordered by γ, then β, then detector.
pub fn best_table(rows: &[MapRow]) -> Vec<BestRow> {
    let mut by_weights: BTreeMap<(u64, u64), Vec<&MapRow>> = BTreeMap::new();
    for r in rows {
        by_weights.entry((ordered(r.gamma), ordered(r.beta))).or_default().push(r);
    }
    let mut out = Vec::new();
    for group in by_weights.values() {
        let best = best_by_detector(
            group
                .iter()
                .map(|r| (ProcedureId::new(r.detector.clone(), r.corpus), r.map_estimate)),
        );
        for (detector, (p, v)) in best {
            out.push(BestRow {
                beta: group[0].beta,
                gamma: group[0].gamma,
                detector,
                corpus: p.corpus_type,
                map_estimate: v,
            });
        }
    }
    out
}

/// Order-preserving key for non-negative floats.
fn ordered(v: f64) -> u64 {
    v.to_bits()
}

pub fn write_best_table(rows: &[BestRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    finish(w)
}

pub fn read_best_table(text: &str) -> Result<Vec<BestRow>, ReportError> {
    Ok(rows::<BestRow>(text)?.into_iter().map(|(_, r)| r).collect())
}

// ---- per-language point precision/recall ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfRow {
    pub detector: String,
    pub corpus: CorpusType,
    pub language: LanguageCategory,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

/// `detector,corpus,language,precision,recall`; undefined values are empty.
pub fn write_perf(rows: &[PerfRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    finish(w)
}

pub fn read_perf(text: &str) -> Result<Vec<PerfRow>, ReportError> {
    Ok(rows::<PerfRow>(text)?.into_iter().map(|(_, r)| r).collect())
}

/// Per-language rate table: one block of precision rows and one of recall
/// rows, one row per corpus type, one column per detector, two decimals.
/// Undefined rates print as `NA`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub language: LanguageCategory,
    pub detectors: Vec<String>,
    /// (measure, corpus) → per-detector rate.
    pub rows: Vec<(Measure, CorpusType, Vec<Option<f64>>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Precision,
    Recall,
}

impl Measure {
    fn label(self) -> &'static str {
        match self {
            Measure::Precision => "precision",
            Measure::Recall => "recall",
        }
    }
}

impl RateTable {
    pub fn from_perf(language: LanguageCategory, detectors: &[String], perf: &[PerfRow]) -> Self {
        let lookup = |d: &str, c: CorpusType| perf.iter().find(|r| r.detector == d && r.corpus == c && r.language == language);
        let mut rows = Vec::new();
        for measure in [Measure::Precision, Measure::Recall] {
            for corpus in CorpusType::ALL {
                let vals = detectors
                    .iter()
                    .map(|d| {
                        lookup(d, corpus).and_then(|r| match measure {
                            Measure::Precision => r.precision,
                            Measure::Recall => r.recall,
                        })
                    })
                    .collect();
                rows.push((measure, corpus, vals));
            }
        }
        Self {
            language,
            detectors: detectors.to_vec(),
            rows,
        }
    }

    pub fn format(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["language".to_string(), "measure".into(), "corpus".into()];
        header.extend(self.detectors.iter().cloned());
        w.write_record(&header).expect("header");
        for (m, c, vals) in &self.rows {
            let mut row = vec![self.language.code().to_string(), m.label().into(), c.label().into()];
            row.extend(vals.iter().map(|v| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.2}"))));
            w.write_record(&row).expect("row");
        }
        String::from_utf8(finish(w)).expect("utf-8")
    }

    pub fn parse(text: &str) -> Result<Self, ReportError> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let header = rdr.headers().map_err(csv_err)?.clone();
        for (i, name) in ["language", "measure", "corpus"].iter().enumerate() {
            if header.get(i) != Some(*name) {
                return Err(ReportError::MissingColumn(name.to_string()));
            }
        }
        let detectors: Vec<String> = header.iter().skip(3).map(String::from).collect();
        let mut language = None;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line());
            let lang = LanguageCategory::from_label(&rec[0]).ok_or_else(|| parse_err(line, "unknown language"))?;
            if *language.get_or_insert(lang) != lang {
                return Err(parse_err(line, "mixed languages"));
            }
            let measure = match &rec[1] {
                "precision" => Measure::Precision,
                "recall" => Measure::Recall,
                other => return Err(parse_err(line, format!("unknown measure {other:?}"))),
            };
            let corpus = parse_corpus(&rec[2], line)?;
            let vals = rec
                .iter()
                .skip(3)
                .map(|c| if c == "NA" { Ok(None) } else { parse_f64(c, line).map(Some) })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push((measure, corpus, vals));
        }
        Ok(Self {
            language: language.ok_or_else(|| parse_err(1, "empty table"))?,
            detectors,
            rows,
        })
    }

    pub fn get(&self, measure: Measure, corpus: CorpusType, detector: &str) -> Option<f64> {
        let col = self.detectors.iter().position(|d| d == detector)?;
        self.rows
            .iter()
            .find(|(m, c, _)| *m == measure && *c == corpus)
            .and_then(|(_, _, v)| v.get(col).copied().flatten())
    }
}

// ---- corpus statistics ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStatsRow {
    pub corpus: CorpusType,
    pub documents: usize,
    pub mean_chars: f64,
    pub min_chars: usize,
    pub max_chars: usize,
}

impl CorpusStatsRow {
    pub fn new(corpus: CorpusType, stats: &CorpusStats) -> Self {
        Self {
            corpus,
            documents: stats.doc_count,
            mean_chars: stats.mean_chars,
            min_chars: stats.min_chars,
            max_chars: stats.max_chars,
        }
    }
}

/// `corpus,documents,mean_chars,min_chars,max_chars`
pub fn write_corpus_stats(rows: &[CorpusStatsRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    finish(w)
}

pub fn read_corpus_stats(text: &str) -> Result<Vec<CorpusStatsRow>, ReportError> {
    Ok(rows::<CorpusStatsRow>(text)?.into_iter().map(|(_, r)| r).collect())
}

// ---- excluded detectors ----

/// One failed corpus of a detector dropped by the completeness audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionRow {
    pub detector: String,
    pub corpus: CorpusType,
    pub reason: String,
}

/// `detector,corpus,reason`; written with a header even when empty.
pub fn write_exclusions(rows: &[ExclusionRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["detector", "corpus", "reason"]).expect("header");
    for r in rows {
        w.write_record([r.detector.as_str(), r.corpus.label(), r.reason.as_str()])
            .expect("row");
    }
    finish(w)
}

pub fn read_exclusions(text: &str) -> Result<Vec<ExclusionRow>, ReportError> {
    Ok(rows::<ExclusionRow>(text)?.into_iter().map(|(_, r)| r).collect())
}

// ---- predictions ----

#[derive(Debug, Serialize, Deserialize)]
struct PredictionRow {
    id: String,
    lang: String,
    conf: Option<f64>,
}

/// One `{"id","lang","conf"}` line per prediction.
pub fn write_predictions(predictions: &[Prediction]) -> Vec<u8> {
    let mut out = Vec::new();
    for p in predictions {
        serde_json::to_writer(
            &mut out,
            &PredictionRow {
                id: p.record_id.clone(),
                lang: p.raw_language.clone(),
                conf: p.confidence,
            },
        )
        .expect("prediction serializes");
        out.push(b'\n');
    }
    out
}

pub fn read_predictions(text: &str, procedure: &ProcedureId) -> Result<Vec<Prediction>, ReportError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let row: PredictionRow = serde_json::from_str(l).map_err(|e| parse_err(i as u64 + 1, e.to_string()))?;
            Ok(Prediction {
                record_id: row.id,
                procedure: procedure.clone(),
                raw_language: row.lang,
                confidence: row.conf,
            })
        })
        .collect()
}
