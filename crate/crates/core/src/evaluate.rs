//! One-vs-rest confusion counts, point precision/recall, and speed
//! normalization.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{Prediction, ProcedureId};
use crate::records::{map_language, AnnotatedRecord, LanguageCategory, MetadataConfig, SubgroupKey};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("prediction for unknown record {0:?}")]
    UnknownRecord(String),
    #[error("no prediction for record {0:?}")]
    MissingPrediction(String),
    #[error("more than one prediction for record {0:?}")]
    DuplicatePrediction(String),
    #[error("predictions mix procedures {0} and {1}")]
    MixedProcedures(ProcedureId, ProcedureId),
    #[error("no predictions")]
    NoPredictions,
    #[error("timing table is empty")]
    EmptyTimings,
    #[error("non-positive time {seconds} for {procedure}")]
    NonPositiveTime { procedure: ProcedureId, seconds: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    ByLanguage,
    #[default]
    ByLanguageAndConfig,
}

impl std::str::FromStr for Grouping {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "by_language" => Ok(Self::ByLanguage),
            "by_language_and_config" => Ok(Self::ByLanguageAndConfig),
            other => Err(format!("unknown grouping {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    Language(LanguageCategory),
    Subgroup(SubgroupKey),
}

impl Group {
    pub fn language(self) -> LanguageCategory {
        match self {
            Group::Language(l) => l,
            Group::Subgroup(k) => k.language,
        }
    }

    pub fn config(self) -> Option<MetadataConfig> {
        match self {
            Group::Language(_) => None,
            Group::Subgroup(k) => Some(k.config),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Language(l) => write!(f, "{l}"),
            Group::Subgroup(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub procedure: ProcedureId,
    pub group: Group,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

/// Compiles one-vs-rest counts for a single procedure. Every group is
/// emitted (12 languages, or 48 subgroups), including all-zero ones.
pub fn count_confusions(
    predictions: &[Prediction],
    records: &[AnnotatedRecord],
    grouping: Grouping,
) -> Result<Vec<ConfusionCounts>, EvalError> {
    let procedure = predictions.first().ok_or(EvalError::NoPredictions)?.procedure.clone();
    let mut by_id: HashMap<&str, LanguageCategory> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        if p.procedure != procedure {
            return Err(EvalError::MixedProcedures(procedure, p.procedure.clone()));
        }
        if by_id.insert(&p.record_id, map_language(&p.raw_language)).is_some() {
            return Err(EvalError::DuplicatePrediction(p.record_id.clone()));
        }
    }
    let record_ids: HashSet<&str> = records.iter().map(|r| r.id()).collect();
    if let Some(p) = predictions.iter().find(|p| !record_ids.contains(p.record_id.as_str())) {
        return Err(EvalError::UnknownRecord(p.record_id.clone()));
    }

    let groups: Vec<Group> = match grouping {
        Grouping::ByLanguage => LanguageCategory::ALL.into_iter().map(Group::Language).collect(),
        Grouping::ByLanguageAndConfig => SubgroupKey::all().map(Group::Subgroup).collect(),
    };
    let mut tally: BTreeMap<Group, [u64; 3]> = groups.iter().map(|g| (*g, [0; 3])).collect();
    let group_of = |lang: LanguageCategory, config: MetadataConfig| match grouping {
        Grouping::ByLanguage => Group::Language(lang),
        Grouping::ByLanguageAndConfig => Group::Subgroup(SubgroupKey::new(lang, config)),
    };
    for r in records {
        let predicted = *by_id
            .get(r.id())
            .ok_or_else(|| EvalError::MissingPrediction(r.id().to_string()))?;
        let truth = r.true_language();
        let config = r.config();
        if predicted == truth {
            tally.get_mut(&group_of(truth, config)).unwrap()[0] += 1;
        } else {
            tally.get_mut(&group_of(predicted, config)).unwrap()[1] += 1;
            tally.get_mut(&group_of(truth, config)).unwrap()[2] += 1;
        }
    }
    Ok(groups
        .into_iter()
        .map(|group| {
            let [tp, fp, fn_] = tally[&group];
            ConfusionCounts {
                procedure: procedure.clone(),
                group,
                tp,
                fp,
                fn_,
            }
        })
        .collect())
}

/// Precision and recall; `None` when the denominator is zero.
pub fn point_precision_recall(counts: &ConfusionCounts) -> (Option<f64>, Option<f64>) {
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    (
        ratio(counts.tp, counts.tp + counts.fp),
        ratio(counts.tp, counts.tp + counts.fn_),
    )
}

/// Sums subgroup counts back into per-language counts.
pub fn collapse_to_languages(counts: &[ConfusionCounts]) -> Vec<ConfusionCounts> {
    let mut acc: BTreeMap<(ProcedureId, LanguageCategory), [u64; 3]> = BTreeMap::new();
    for c in counts {
        let e = acc.entry((c.procedure.clone(), c.group.language())).or_default();
        e[0] += c.tp;
        e[1] += c.fp;
        e[2] += c.fn_;
    }
    acc.into_iter()
        .map(|((procedure, lang), [tp, fp, fn_])| ConfusionCounts {
            procedure,
            group: Group::Language(lang),
            tp,
            fp,
            fn_,
        })
        .collect()
}

/// Elapsed seconds per procedure.
pub type TimingTable = BTreeMap<ProcedureId, f64>;

/// Normalized speeds in (0, 1]; the fastest procedure scores 1.
pub type SpeedScores = BTreeMap<ProcedureId, f64>;

/// `t_min / t` for every entry, so faster procedures score higher.
pub fn normalize_speeds(table: &TimingTable) -> Result<SpeedScores, EvalError> {
    if table.is_empty() {
        return Err(EvalError::EmptyTimings);
    }
    for (p, &t) in table {
        if !(t > 0.0 && t.is_finite()) {
            return Err(EvalError::NonPositiveTime {
                procedure: p.clone(),
                seconds: t,
            });
        }
    }
    let t_min = table.values().copied().fold(f64::INFINITY, f64::min);
    Ok(table.iter().map(|(p, &t)| (p.clone(), t_min / t)).collect())
}
