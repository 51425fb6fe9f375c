//! `lidbench evaluate`: corpora, detection, confusion counts and timings.

use std::fs::{self, File};
use std::path::Path;

use lidbench::corpora::write_corpus_dump;
use lidbench::detect::{audit_with_repeats, ProcedureRun};
use lidbench::evaluate::{collapse_to_languages, TimingTable};
use lidbench::records::RecordFormat;
use lidbench::report::{
    read_timings, write_confusions, write_corpus_stats, write_exclusions, write_perf, write_predictions, write_speeds,
    write_timings, CorpusStatsRow, ExclusionRow, PerfRow, RateTable,
};
use lidbench::{
    build_corpus, corpus_stats, count_confusions, ingest_records, normalize_speeds, point_precision_recall,
    AnnotatedRecord, CorpusDocument, CorpusType, DetectorHandle, LanguageCategory, NgramModel, ProcedureId, Registry,
};
use log::{info, warn};

use crate::config::{DetectorSpec, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{write_atomic, Layout};

/// Floor for measured times below clock resolution.
const CLOCK_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateSummary {
    pub procedures: Vec<ProcedureId>,
    pub excluded: Vec<String>,
}

fn load_records(path: &Path) -> Result<Vec<AnnotatedRecord>> {
    const STAGE: &str = "ingest";
    let format = RecordFormat::from_path(path);
    let file = File::open(path).map_err(|e| CliError::read(STAGE, path, e))?;
    ingest_records(file, format).map_err(|e| CliError::input(STAGE, format!("{}: {e}", path.display())))
}

fn open_detectors(cfg: &RunConfig) -> Result<Registry> {
    const STAGE: &str = "detectors";
    if cfg.detectors.is_empty() {
        return Err(CliError::usage(STAGE, "no detectors; pass --builtin or --adapter"));
    }
    let mut registry = Registry::new();
    for (name, spec) in &cfg.detectors {
        let handle = match spec {
            DetectorSpec::Builtin(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::read(STAGE, path, e))?;
                let model = NgramModel::from_json(&text)
                    .map_err(|e| CliError::input(STAGE, format!("model {}: {e}", path.display())))?;
                DetectorHandle::builtin(name.clone(), model)
            }
            DetectorSpec::External(cmd) => DetectorHandle::external(name.clone(), cmd.clone())
                .map_err(|e| CliError::detector(STAGE, format!("adapter {name:?} failed to start: {e}")))?,
        };
        registry
            .register(handle)
            .map_err(|e| CliError::usage(STAGE, e))?;
    }
    Ok(registry)
}

fn resolve_timings(cfg: &RunConfig, measured: TimingTable) -> Result<TimingTable> {
    const STAGE: &str = "timing";
    let Some(path) = &cfg.timings else {
        return Ok(measured.into_iter().map(|(p, t)| (p, t.max(CLOCK_FLOOR))).collect());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::read(STAGE, path, e))?;
    let table = read_timings(&text).map_err(|e| CliError::input(STAGE, format!("{}: {e}", path.display())))?;
    measured
        .keys()
        .map(|p| {
            table
                .get(p)
                .map(|&t| (p.clone(), t))
                .ok_or_else(|| CliError::input(STAGE, format!("{} has no time for {p}", path.display())))
        })
        .collect()
}

pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvaluateSummary> {
    let layout = Layout::new(&cfg.out);
    let records_path = cfg
        .records
        .as_deref()
        .ok_or_else(|| CliError::usage("config", "no records file; pass --records"))?;
    let records = load_records(records_path)?;
    info!("loaded {} records", records.len());

    let mut corpora: Vec<Vec<CorpusDocument>> = Vec::new();
    let mut stats = Vec::new();
    for corpus_type in CorpusType::ALL {
        let corpus = build_corpus(&records, corpus_type).map_err(|e| CliError::input("corpora", e))?;
        let s = corpus_stats(&corpus).map_err(|e| CliError::input("corpora", e))?;
        stats.push(CorpusStatsRow::new(corpus_type, &s));
        write_atomic(&layout.corpus_dump(corpus_type.label()), &write_corpus_dump(&corpus))?;
        corpora.push(corpus);
    }
    write_atomic(&layout.corpus_stats(), &write_corpus_stats(&stats))?;

    let mut registry = open_detectors(cfg)?;
    let mut exclusions = Vec::new();
    let mut excluded = Vec::new();
    let mut runs: Vec<(ProcedureId, ProcedureRun)> = Vec::new();
    for handle in registry.detectors() {
        let report = audit_with_repeats(handle, &corpora, cfg.repeats);
        if report.complete {
            for corpus_type in CorpusType::ALL {
                let run = report.runs[&corpus_type].clone();
                runs.push((ProcedureId::new(handle.name.clone(), corpus_type), run));
            }
        } else {
            for f in &report.failures {
                warn!("excluding {}: {} on corpus {}", handle.name, f.error, f.corpus_type);
                exclusions.push(ExclusionRow {
                    detector: handle.name.clone(),
                    corpus: f.corpus_type,
                    reason: f.error.to_string(),
                });
            }
            excluded.push(handle.name.clone());
        }
    }
    for name in &excluded {
        registry.exclude(name);
    }
    write_atomic(&layout.exclusions(), &write_exclusions(&exclusions))?;
    if registry.is_empty() {
        return Err(CliError::detector(
            "completeness",
            format!("every detector failed the completeness audit: {}", excluded.join(", ")),
        ));
    }

    let mut counts = Vec::new();
    let mut measured = TimingTable::new();
    for (procedure, run) in &runs {
        write_atomic(
            &layout.predictions(&procedure.detector, procedure.corpus_type.label()),
            &write_predictions(&run.predictions),
        )?;
        counts.extend(
            count_confusions(&run.predictions, &records, cfg.grouping).map_err(|e| CliError::internal("counting", e))?,
        );
        measured.insert(procedure.clone(), run.elapsed_seconds);
    }
    write_atomic(&layout.confusion(), &write_confusions(&counts))?;

    let detectors: Vec<String> = registry.detectors().iter().map(|d| d.name.clone()).collect();
    let times = resolve_timings(cfg, measured)?;
    let speeds = normalize_speeds(&times).map_err(|e| CliError::input("timing", e))?;
    write_atomic(&layout.timings(), &write_timings(&times, &detectors))?;
    write_atomic(&layout.speeds(), &write_speeds(&times, &speeds))?;

    let perf: Vec<PerfRow> = collapse_to_languages(&counts)
        .iter()
        .map(|c| {
            let (precision, recall) = point_precision_recall(c);
            PerfRow {
                detector: c.procedure.detector.clone(),
                corpus: c.procedure.corpus_type,
                language: c.group.language(),
                precision,
                recall,
            }
        })
        .collect();
    write_atomic(&layout.perf(), &write_perf(&perf))?;
    for language in LanguageCategory::ALL {
        let table = RateTable::from_perf(language, &detectors, &perf);
        write_atomic(&layout.rates(language.code()), table.format().as_bytes())?;
    }

    Ok(EvaluateSummary {
        procedures: runs.into_iter().map(|(p, _)| p).collect(),
        excluded,
    })
}
