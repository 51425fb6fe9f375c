//! Benchmarking toolkit for language identification over bibliographic
//! metadata.
//!
//! The pipeline runs in two stages. Evaluation builds one corpus per
//! metadata combination from annotated records, runs every detector over
//! every corpus, and compiles one-vs-rest confusion counts and processing
//! times. Simulation turns those counts into Beta posteriors, mixes them
//! with Dirichlet-distributed database proportions, and reports the
//! posterior mode of a precision/recall/speed F-score over a grid of
//! weightings.

pub mod corpora;
pub mod detect;
pub mod evaluate;
pub mod records;
pub mod report;
pub mod simulate;

pub use corpora::{build_corpus, build_document, corpus_stats, terminate_sentence, CorpusDocument, CorpusType};
pub use detect::{
    audit_completeness, measure_time, ngram_detect, run_procedure, train_ngram_model, DetectorHandle, NgramModel,
    Prediction, ProcedureId, Registry,
};
pub use evaluate::{count_confusions, normalize_speeds, point_precision_recall, ConfusionCounts, Grouping};
pub use records::{
    classify_config, ingest_records, load_weights, map_language, AnnotatedRecord, DatabaseWeights, LanguageCategory,
    MetadataConfig, SubgroupKey,
};
pub use simulate::{
    best_per_algorithm, beta_posterior, dirichlet_params, estimate_mode, f_beta_gamma, run_simulation, simulate_procedure,
    FWeights, SimulationConfig, SimulationResult,
};
