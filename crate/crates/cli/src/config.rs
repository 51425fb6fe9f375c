//! Run configuration: an optional TOML file with command-line overrides.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use lidbench::simulate::{MixtureMode, SimulationConfig};
use lidbench::Grouping;
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Options shared by `evaluate`, `simulate` and `run`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML run configuration; flags override its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Annotated records (.jsonl or .csv)
    #[arg(long, value_name = "FILE")]
    pub records: Option<PathBuf>,
    /// Database counts CSV (language,config,count)
    #[arg(long, value_name = "FILE")]
    pub weights: Option<PathBuf>,
    /// Output directory for all artifacts
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulation draws per procedure [default: 100000]
    #[arg(long)]
    pub draws: Option<usize>,
    /// Comma-separated recall weights, e.g. 0.5,1,2
    #[arg(long, value_name = "LIST")]
    pub beta_grid: Option<String>,
    /// Comma-separated speed weights, e.g. 0,0.5,1,2
    #[arg(long, value_name = "LIST")]
    pub gamma_set: Option<String>,
    /// weighted_sum or categorical_component
    #[arg(long, value_name = "MODE")]
    pub mixture_mode: Option<String>,
    /// by_language or by_language_and_config
    #[arg(long, value_name = "MODE")]
    pub grouping: Option<String>,
    /// Timing repeats per procedure; the minimum is kept
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Skip SVG plots
    #[arg(long)]
    pub no_plots: bool,
    /// External detector, `name=command`; repeatable
    #[arg(long = "adapter", value_name = "NAME=CMD")]
    pub adapters: Vec<String>,
    /// Built-in n-gram detector, `name=model.json`; repeatable
    #[arg(long = "builtin", value_name = "NAME=MODEL")]
    pub builtins: Vec<String>,
    /// Use this timing table instead of measured times
    #[arg(long, value_name = "FILE")]
    pub timings: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    records: Option<PathBuf>,
    weights: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    draws: Option<usize>,
    beta_grid: Option<Vec<f64>>,
    gamma_set: Option<Vec<f64>>,
    mixture_mode: Option<String>,
    grouping: Option<String>,
    repeats: Option<usize>,
    plots: Option<bool>,
    timings: Option<PathBuf>,
    #[serde(default)]
    adapters: BTreeMap<String, String>,
    #[serde(default)]
    builtins: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DetectorSpec {
    Builtin(PathBuf),
    External(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub records: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub out: PathBuf,
    pub simulation: SimulationConfig,
    pub grouping: Grouping,
    pub repeats: usize,
    pub plots: bool,
    pub timings: Option<PathBuf>,
    /// Detectors by name; they are registered in name order.
    pub detectors: BTreeMap<String, DetectorSpec>,
}

const STAGE: &str = "config";

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(STAGE, format!("invalid {what} value {v:?}")))
        })
        .collect()
}

fn split_pair(s: &str, flag: &str) -> Result<(String, String)> {
    match s.split_once('=') {
        Some((name, rest)) if !name.trim().is_empty() && !rest.trim().is_empty() => {
            Ok((name.trim().to_string(), rest.to_string()))
        }
        _ => Err(CliError::usage(STAGE, format!("--{flag} expects NAME=VALUE, got {s:?}"))),
    }
}

fn relative_to(base: Option<&Path>, p: PathBuf) -> PathBuf {
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> Result<Self> {
        let (file, base) = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::read(STAGE, path, e))?;
                let file: FileConfig = toml::from_str(&text)
                    .map_err(|e| CliError::input(STAGE, format!("{}: {e}", path.display())))?;
                (file, path.parent().map(Path::to_path_buf))
            }
            None => (FileConfig::default(), None),
        };
        let base = base.as_deref();

        let mut simulation = SimulationConfig::default();
        if let Some(seed) = args.seed.or(file.seed) {
            simulation.seed = seed;
        }
        if let Some(draws) = args.draws.or(file.draws) {
            simulation.draws = draws;
        }
        if let Some(grid) = args.beta_grid.as_deref() {
            simulation.beta_grid = parse_list(grid, "beta")?;
        } else if let Some(grid) = file.beta_grid {
            simulation.beta_grid = grid;
        }
        if let Some(set) = args.gamma_set.as_deref() {
            simulation.gamma_set = parse_list(set, "gamma")?;
        } else if let Some(set) = file.gamma_set {
            simulation.gamma_set = set;
        }
        if let Some(mode) = args.mixture_mode.as_ref().or(file.mixture_mode.as_ref()) {
            simulation.mixture_mode = mode
                .parse::<MixtureMode>()
                .map_err(|e| CliError::usage(STAGE, e))?;
        }
        simulation.validate().map_err(|e| CliError::usage(STAGE, e))?;

        let grouping = match args.grouping.as_ref().or(file.grouping.as_ref()) {
            Some(g) => g.parse::<Grouping>().map_err(|e| CliError::usage(STAGE, e))?,
            None => Grouping::default(),
        };
        let repeats = args.repeats.or(file.repeats).unwrap_or(1);
        if repeats == 0 {
            return Err(CliError::usage(STAGE, "--repeats must be at least 1"));
        }

        let mut detectors = BTreeMap::new();
        for (name, model) in file.builtins {
            detectors.insert(name, DetectorSpec::Builtin(relative_to(base, model)));
        }
        for (name, cmd) in file.adapters {
            if detectors.insert(name.clone(), DetectorSpec::External(cmd)).is_some() {
                return Err(CliError::usage(STAGE, format!("detector {name:?} defined twice")));
            }
        }
        for spec in &args.builtins {
            let (name, model) = split_pair(spec, "builtin")?;
            detectors.insert(name, DetectorSpec::Builtin(PathBuf::from(model)));
        }
        for spec in &args.adapters {
            let (name, cmd) = split_pair(spec, "adapter")?;
            detectors.insert(name, DetectorSpec::External(cmd));
        }

        let out = args
            .out
            .clone()
            .or_else(|| file.out.map(|p| relative_to(base, p)))
            .ok_or_else(|| CliError::usage(STAGE, "no output directory; pass --out"))?;

        Ok(Self {
            records: args.records.clone().or_else(|| file.records.map(|p| relative_to(base, p))),
            weights: args.weights.clone().or_else(|| file.weights.map(|p| relative_to(base, p))),
            out,
            simulation,
            grouping,
            repeats,
            plots: !args.no_plots && file.plots.unwrap_or(true),
            timings: args.timings.clone().or_else(|| file.timings.map(|p| relative_to(base, p))),
            detectors,
        })
    }
}
