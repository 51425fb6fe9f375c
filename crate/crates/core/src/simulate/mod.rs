//! Database-scale performance simulation.
//!
//! Precision and recall of each (language, metadata configuration) subgroup
//! get Beta posteriors from their confusion counts; subgroup proportions get
//! a Dirichlet posterior from database article counts. Each draw mixes the
//! subgroup scores with one Dirichlet draw of proportions. `F_{β,γ}` is then
//! computed per draw and reduced to its posterior mode.

mod fscore;
mod mode;
mod posterior;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::detect::ProcedureId;
use crate::evaluate::{ConfusionCounts, Group};
use crate::records::{DatabaseWeights, MetadataConfig, SubgroupKey};

pub use fscore::{f_beta_gamma, FWeights};
pub use mode::{density_on_grid, estimate_mode, silverman_bandwidth, GRID_POINTS, MIN_SAMPLES};
pub use posterior::{beta_posterior, dirichlet_params, BetaParams, DirichletParams, DirichletSampler};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("no posterior for weighted subgroup {0}")]
    MissingPosterior(SubgroupKey),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("mode estimation needs at least {MIN_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("no speed score for {0}")]
    MissingSpeed(ProcedureId),
    #[error("no confusion counts for {0}")]
    MissingCounts(ProcedureId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureMode {
    /// Per draw, the Dirichlet-weighted average of one Beta draw per subgroup.
    #[default]
    WeightedSum,
    /// Per draw, one subgroup picked by the Dirichlet weights, then one Beta
    /// draw from that subgroup.
    CategoricalComponent,
}

impl fmt::Display for MixtureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::WeightedSum => "weighted_sum",
            Self::CategoricalComponent => "categorical_component",
        })
    }
}

impl FromStr for MixtureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weighted_sum" => Ok(Self::WeightedSum),
            "categorical_component" => Ok(Self::CategoricalComponent),
            other => Err(format!("unknown mixture mode {other:?}")),
        }
    }
}

pub const DEFAULT_DRAWS: usize = 100_000;

pub fn default_beta_grid() -> Vec<f64> {
    vec![0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]
}

/// 0.5 to 2.0 in steps of 0.05, for smooth curves.
pub fn dense_beta_grid() -> Vec<f64> {
    (0..=30).map(|i| (50 + 5 * i) as f64 / 100.0).collect()
}

pub fn default_gamma_set() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub draws: usize,
    pub seed: u64,
    pub beta_grid: Vec<f64>,
    pub gamma_set: Vec<f64>,
    pub mixture_mode: MixtureMode,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            draws: DEFAULT_DRAWS,
            seed: 0,
            beta_grid: default_beta_grid(),
            gamma_set: default_gamma_set(),
            mixture_mode: MixtureMode::WeightedSum,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.draws == 0 {
            return Err(SimError::InvalidParameter("draws must be positive".into()));
        }
        if self.beta_grid.is_empty() || self.gamma_set.is_empty() {
            return Err(SimError::InvalidParameter("empty weighing grid".into()));
        }
        if self.beta_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SimError::InvalidParameter("beta grid must be strictly increasing".into()));
        }
        for &b in &self.beta_grid {
            for &g in &self.gamma_set {
                FWeights::new(b, g)?;
            }
        }
        Ok(())
    }

    /// All (β, γ) pairs, γ-major.
    pub fn weight_grid(&self) -> Vec<FWeights> {
        self.gamma_set
            .iter()
            .flat_map(|&gamma| self.beta_grid.iter().map(move |&beta| FWeights { beta, gamma }))
            .collect()
    }
}

/// Deterministic RNG substream for (seed, procedure, tag).
pub fn substream(seed: u64, procedure: &ProcedureId, tag: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(procedure.detector.as_bytes());
    h.update([0]);
    h.update(procedure.corpus_type.label().as_bytes());
    h.update([0]);
    h.update(tag.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Precision and recall Beta posteriors per subgroup.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubgroupPosteriors {
    pub precision: BTreeMap<SubgroupKey, BetaParams>,
    pub recall: BTreeMap<SubgroupKey, BetaParams>,
}

impl SubgroupPosteriors {
    /// From (tp, fp, fn) per subgroup.
    pub fn from_counts(counts: &BTreeMap<SubgroupKey, [u64; 3]>) -> Self {
        let mut out = Self::default();
        for (k, [tp, fp, fn_]) in counts {
            out.precision.insert(*k, beta_posterior(*tp, *fp));
            out.recall.insert(*k, beta_posterior(*tp, *fn_));
        }
        out
    }
}

fn samplers(
    posteriors: &BTreeMap<SubgroupKey, BetaParams>,
    dir: &DirichletParams,
) -> Result<Vec<Beta<f64>>, SimError> {
    dir.keys()
        .map(|k| {
            posteriors
                .get(&k)
                .map(BetaParams::sampler)
                .ok_or(SimError::MissingPosterior(k))
        })
        .collect()
}

/// Draws `config.draws` database-level precision and recall values for one
/// procedure. Proportion weights, precision and recall each use their own
/// substream; one proportion draw is shared by the precision and recall
/// values of the same iteration.
pub fn simulate_procedure(
    procedure: &ProcedureId,
    posteriors: &SubgroupPosteriors,
    dir: &DirichletParams,
    config: &SimulationConfig,
) -> Result<(Vec<f64>, Vec<f64>), SimError> {
    config.validate()?;
    let prec = samplers(&posteriors.precision, dir)?;
    let rec = samplers(&posteriors.recall, dir)?;
    let dirichlet = dir.sampler();
    let mut rng_w = substream(config.seed, procedure, "weights");
    let mut rng_p = substream(config.seed, procedure, "precision");
    let mut rng_r = substream(config.seed, procedure, "recall");

    let mut weights = vec![0.0; dir.len()];
    let mut p_draws = Vec::with_capacity(config.draws);
    let mut r_draws = Vec::with_capacity(config.draws);
    for _ in 0..config.draws {
        dirichlet.sample_into(&mut rng_w, &mut weights);
        match config.mixture_mode {
            MixtureMode::WeightedSum => {
                let mut p = 0.0;
                let mut r = 0.0;
                for ((w, bp), br) in weights.iter().zip(&prec).zip(&rec) {
                    p += w * bp.sample(&mut rng_p);
                    r += w * br.sample(&mut rng_r);
                }
                p_draws.push(p.clamp(0.0, 1.0));
                r_draws.push(r.clamp(0.0, 1.0));
            }
            MixtureMode::CategoricalComponent => {
                let k = pick_component(&weights, rng_w.random::<f64>());
                p_draws.push(prec[k].sample(&mut rng_p));
                r_draws.push(rec[k].sample(&mut rng_r));
            }
        }
    }
    Ok((p_draws, r_draws))
}

fn pick_component(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the cumulative total
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapEstimate {
    pub beta: f64,
    pub gamma: f64,
    pub map_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub procedure: ProcedureId,
    pub precision_draws: Vec<f64>,
    pub recall_draws: Vec<f64>,
    pub speed: f64,
    /// One entry per (β, γ) in [`SimulationConfig::weight_grid`] order.
    pub map_estimates: Vec<MapEstimate>,
}

impl SimulationResult {
    pub fn map_at(&self, w: FWeights) -> Option<f64> {
        self.map_estimates
            .iter()
            .find(|m| m.beta == w.beta && m.gamma == w.gamma)
            .map(|m| m.map_estimate)
    }
}

/// Inputs for one procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureInput {
    pub procedure: ProcedureId,
    /// (tp, fp, fn) per subgroup; missing subgroups count as all-zero.
    pub counts: BTreeMap<SubgroupKey, [u64; 3]>,
    pub speed: f64,
}

/// Groups confusion counts by procedure into per-subgroup (tp, fp, fn).
/// Per-language counts are reused for each of the four configurations.
pub fn subgroup_counts(counts: &[ConfusionCounts]) -> BTreeMap<ProcedureId, BTreeMap<SubgroupKey, [u64; 3]>> {
    let mut out: BTreeMap<ProcedureId, BTreeMap<SubgroupKey, [u64; 3]>> = BTreeMap::new();
    for c in counts {
        let entry = out.entry(c.procedure.clone()).or_default();
        let keys: Vec<SubgroupKey> = match c.group {
            Group::Subgroup(k) => vec![k],
            Group::Language(l) => MetadataConfig::ALL.iter().map(|&cfg| SubgroupKey::new(l, cfg)).collect(),
        };
        for k in keys {
            let e = entry.entry(k).or_default();
            e[0] += c.tp;
            e[1] += c.fp;
            e[2] += c.fn_;
        }
    }
    out
}

/// Assembles [`ProcedureInput`]s from confusion counts and speed scores.
pub fn procedure_inputs(
    procedures: &[ProcedureId],
    counts: &[ConfusionCounts],
    speeds: &BTreeMap<ProcedureId, f64>,
) -> Result<Vec<ProcedureInput>, SimError> {
    let mut grouped = subgroup_counts(counts);
    procedures
        .iter()
        .map(|p| {
            let counts = grouped.remove(p).ok_or_else(|| SimError::MissingCounts(p.clone()))?;
            let speed = *speeds.get(p).ok_or_else(|| SimError::MissingSpeed(p.clone()))?;
            Ok(ProcedureInput {
                procedure: p.clone(),
                counts,
                speed,
            })
        })
        .collect()
}

/// Simulates one procedure against `dir` and extracts a MAP estimate for
/// every (β, γ). Speed is held constant across draws.
pub fn simulate_one(input: &ProcedureInput, dir: &DirichletParams, config: &SimulationConfig) -> Result<SimulationResult, SimError> {
    if !(input.speed > 0.0 && input.speed <= 1.0) {
        return Err(SimError::OutOfRange(format!("speed {} for {}", input.speed, input.procedure)));
    }
    let mut counts = input.counts.clone();
    for k in dir.keys() {
        counts.entry(k).or_default();
    }
    let posteriors = SubgroupPosteriors::from_counts(&counts);
    let (precision_draws, recall_draws) = simulate_procedure(&input.procedure, &posteriors, dir, config)?;
    let mut f = vec![0.0; precision_draws.len()];
    let mut map_estimates = Vec::new();
    for w in config.weight_grid() {
        let (b2, g2) = (w.beta * w.beta, w.gamma * w.gamma);
        for ((slot, &p), &r) in f.iter_mut().zip(&precision_draws).zip(&recall_draws) {
            *slot = fscore::f_unchecked(p, r, input.speed, b2, g2);
        }
        map_estimates.push(MapEstimate {
            beta: w.beta,
            gamma: w.gamma,
            map_estimate: estimate_mode(&f)?,
        });
    }
    Ok(SimulationResult {
        procedure: input.procedure.clone(),
        precision_draws,
        recall_draws,
        speed: input.speed,
        map_estimates,
    })
}

/// Runs every procedure against the Dirichlet posterior over all 48
/// subgroups. Procedures are simulated in parallel; results come back in
/// input order and do not depend on scheduling.
pub fn run_simulation(
    inputs: &[ProcedureInput],
    weights: &DatabaseWeights,
    config: &SimulationConfig,
) -> Result<Vec<SimulationResult>, SimError> {
    config.validate()?;
    let dir = dirichlet_params(weights);
    inputs.par_iter().map(|input| simulate_one(input, &dir, config)).collect()
}

/// Picks, per detector, the entry with the highest value; equal values go to
/// the simpler corpus (T < J < A < G).
pub fn best_by_detector(entries: impl IntoIterator<Item = (ProcedureId, f64)>) -> BTreeMap<String, (ProcedureId, f64)> {
    let mut sorted: Vec<(ProcedureId, f64)> = entries.into_iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut best: BTreeMap<String, (ProcedureId, f64)> = BTreeMap::new();
    for (p, v) in sorted {
        match best.get(&p.detector) {
            Some((_, cur)) if v <= *cur => {}
            _ => {
                best.insert(p.detector.clone(), (p, v));
            }
        }
    }
    best
}

/// Best procedure per detector at one (β, γ).
pub fn best_per_algorithm(results: &[SimulationResult], w: FWeights) -> BTreeMap<String, (ProcedureId, f64)> {
    best_by_detector(
        results
            .iter()
            .filter_map(|r| r.map_at(w).map(|m| (r.procedure.clone(), m))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpora::CorpusType;
    use crate::records::LanguageCategory;

    fn key(l: LanguageCategory) -> SubgroupKey {
        SubgroupKey::new(l, MetadataConfig::TitleOnly)
    }

    fn proc_id() -> ProcedureId {
        ProcedureId::new("d", CorpusType::Titles)
    }

    fn cfg(draws: usize) -> SimulationConfig {
        SimulationConfig {
            draws,
            seed: 42,
            ..Default::default()
        }
    }

    #[test]
    fn uniform_single_subgroup_mean() {
        let k = key(LanguageCategory::En);
        let post = SubgroupPosteriors::from_counts(&[(k, [0, 0, 0])].into_iter().collect());
        let dir = DirichletParams::from_counts([(k, 0)]).unwrap();
        let (p, r) = simulate_procedure(&proc_id(), &post, &dir, &cfg(100_000)).unwrap();
        let se = (1.0f64 / 12.0).sqrt() / (100_000f64).sqrt();
        for draws in [p, r] {
            let mean = draws.iter().sum::<f64>() / draws.len() as f64;
            assert!((mean - 0.5).abs() < 3.0 * se, "{mean}");
        }
    }

    #[test]
    fn symmetric_near_degenerate_mixture() {
        let (a, b) = (key(LanguageCategory::En), key(LanguageCategory::Fr));
        let mut post = SubgroupPosteriors::default();
        post.precision.insert(a, BetaParams::new(1_000_001.0, 1.0).unwrap());
        post.precision.insert(b, BetaParams::new(1.0, 1_000_001.0).unwrap());
        post.recall = post.precision.clone();
        let dir = DirichletParams::from_counts([(a, 0), (b, 0)]).unwrap();
        let (p, _) = simulate_procedure(&proc_id(), &post, &dir, &cfg(20_000)).unwrap();
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
        // each draw is its Dirichlet weight on `a`, i.e. Uniform(0, 1)
        assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn deterministic_given_seed() {
        let k = key(LanguageCategory::De);
        let post = SubgroupPosteriors::from_counts(&[(k, [5, 2, 3])].into_iter().collect());
        let dir = DirichletParams::from_counts([(k, 10)]).unwrap();
        let run = || simulate_procedure(&proc_id(), &post, &dir, &cfg(1000)).unwrap();
        assert_eq!(run(), run());
        let mut other = cfg(1000);
        other.seed = 43;
        assert_ne!(run(), simulate_procedure(&proc_id(), &post, &dir, &other).unwrap());
    }

    #[test]
    fn missing_posterior_is_an_error() {
        let (a, b) = (key(LanguageCategory::En), key(LanguageCategory::Fr));
        let post = SubgroupPosteriors::from_counts(&[(a, [1, 1, 1])].into_iter().collect());
        let dir = DirichletParams::from_counts([(a, 1), (b, 1)]).unwrap();
        assert_eq!(
            simulate_procedure(&proc_id(), &post, &dir, &cfg(10)),
            Err(SimError::MissingPosterior(b))
        );
    }

    #[test]
    fn categorical_mode_picks_components() {
        let (a, b) = (key(LanguageCategory::En), key(LanguageCategory::Fr));
        let mut post = SubgroupPosteriors::default();
        post.precision.insert(a, BetaParams::new(1_000_001.0, 1.0).unwrap());
        post.precision.insert(b, BetaParams::new(1.0, 1_000_001.0).unwrap());
        post.recall = post.precision.clone();
        let dir = DirichletParams::from_counts([(a, 999), (b, 0)]).unwrap();
        let mut c = cfg(10_000);
        c.mixture_mode = MixtureMode::CategoricalComponent;
        let (p, _) = simulate_procedure(&proc_id(), &post, &dir, &c).unwrap();
        // draws sit near 1 (component a) or near 0 (component b)
        assert!(p.iter().all(|&x| x > 0.99 || x < 0.01));
        let share = p.iter().filter(|&&x| x > 0.5).count() as f64 / p.len() as f64;
        assert!((share - 0.998).abs() < 0.01, "{share}");
    }

    #[test]
    fn pick_component_handles_rounding() {
        assert_eq!(pick_component(&[0.5, 0.5], 0.25), 0);
        assert_eq!(pick_component(&[0.5, 0.5], 0.75), 1);
        assert_eq!(pick_component(&[0.3, 0.7, 0.0], 1.0), 1);
    }

    #[test]
    fn best_selection_rules() {
        let p = |c| ProcedureId::new("d", c);
        use CorpusType::*;
        let pick = |vals: [(CorpusType, f64); 4]| best_by_detector(vals.map(|(c, v)| (p(c), v)))["d"].0.corpus_type;
        assert_eq!(pick([(Titles, 0.8), (TitlesAbstracts, 0.7), (TitlesJournals, 0.6), (Greedy, 0.5)]), Titles);
        assert_eq!(pick([(Greedy, 0.8), (TitlesJournals, 0.8), (Titles, 0.8), (TitlesAbstracts, 0.1)]), Titles);
        assert_eq!(pick([(Greedy, 0.8), (TitlesJournals, 0.8), (Titles, 0.7), (TitlesAbstracts, 0.8)]), TitlesJournals);
        assert_eq!(pick([(Titles, 0.5), (TitlesJournals, 0.5), (TitlesAbstracts, 0.5), (Greedy, 0.5)]), Titles);
    }

    #[test]
    fn config_validation() {
        let mut c = SimulationConfig::default();
        assert!(c.validate().is_ok());
        assert_eq!(c.weight_grid().len(), 28);
        c.beta_grid = vec![1.0, 0.5];
        assert!(c.validate().is_err());
        c.beta_grid = vec![];
        assert!(c.validate().is_err());
        assert_eq!(dense_beta_grid().len(), 31);
        assert_eq!(dense_beta_grid()[30], 2.0);
    }
}
