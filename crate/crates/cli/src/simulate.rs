//! `lidbench simulate`: database-scale posterior simulation over the
//! evaluation artifacts.

use std::fs::{self, File};
use std::path::Path;

use lidbench::report::{
    best_table, map_rows, read_confusions, read_perf, read_speeds, write_best_table, write_map_table,
};
use lidbench::simulate::{procedure_inputs, MixtureMode};
use lidbench::{load_weights, run_simulation, LanguageCategory, ProcedureId, SubgroupKey};
use log::{info, warn};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{write_atomic, Layout};
use crate::plots::{map_curves_svg, precision_recall_svg, select_plot_procedures, speed_svg};

/// Configuration echo written next to the MAP table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub draws: usize,
    pub beta_grid: Vec<f64>,
    pub gamma_set: Vec<f64>,
    pub mixture_mode: MixtureMode,
    pub procedures: Vec<String>,
    pub subgroups: usize,
    pub dropped_weight_rows: usize,
}

fn read_artifact(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(CliError::input(
            "simulate",
            format!("missing {}; run `lidbench evaluate` first", path.display()),
        ));
    }
    fs::read_to_string(path).map_err(|e| CliError::read("simulate", path, e))
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Summary> {
    let layout = Layout::new(&cfg.out);
    let weights_path = cfg
        .weights
        .as_deref()
        .ok_or_else(|| CliError::usage("config", "no weights file; pass --weights"))?;
    let counts = read_confusions(&read_artifact(&layout.confusion())?)
        .map_err(|e| CliError::input("simulate", format!("{}: {e}", layout.confusion().display())))?;
    let (_, speeds) = read_speeds(&read_artifact(&layout.speeds())?)
        .map_err(|e| CliError::input("simulate", format!("{}: {e}", layout.speeds().display())))?;

    let file = File::open(weights_path).map_err(|e| CliError::read("weights", weights_path, e))?;
    let loaded = load_weights(file).map_err(|e| CliError::input("weights", format!("{}: {e}", weights_path.display())))?;
    if loaded.dropped_rows > 0 {
        warn!(
            "dropped {} weight rows ({} articles) outside the language categories",
            loaded.dropped_rows, loaded.dropped_total
        );
    }

    let procedures: Vec<ProcedureId> = speeds.keys().cloned().collect();
    let inputs = procedure_inputs(&procedures, &counts, &speeds).map_err(|e| CliError::input("simulate", e))?;
    info!(
        "simulating {} procedures x {} weightings x {} draws",
        inputs.len(),
        cfg.simulation.weight_grid().len(),
        cfg.simulation.draws
    );
    let results = run_simulation(&inputs, &loaded.weights, &cfg.simulation).map_err(|e| CliError::internal("simulate", e))?;

    let rows = map_rows(&results);
    write_atomic(&layout.map(), &write_map_table(&rows))?;
    write_atomic(&layout.best(), &write_best_table(&best_table(&rows)))?;

    let summary = Summary {
        seed: cfg.simulation.seed,
        draws: cfg.simulation.draws,
        beta_grid: cfg.simulation.beta_grid.clone(),
        gamma_set: cfg.simulation.gamma_set.clone(),
        mixture_mode: cfg.simulation.mixture_mode,
        procedures: procedures.iter().map(ToString::to_string).collect(),
        subgroups: SubgroupKey::all().count(),
        dropped_weight_rows: loaded.dropped_rows,
    };
    let mut json = serde_json::to_vec_pretty(&summary).map_err(|e| CliError::internal("simulate", e))?;
    json.push(b'\n');
    write_atomic(&layout.summary(), &json)?;

    if cfg.plots {
        let plots = layout.plots();
        let perf = read_perf(&read_artifact(&layout.perf())?)
            .map_err(|e| CliError::input("plots", format!("{}: {e}", layout.perf().display())))?;
        let selected = select_plot_procedures(&perf);
        for language in LanguageCategory::ALL {
            let svg = precision_recall_svg(language, &selected);
            write_atomic(&plots.join(format!("precision_recall_{}.svg", language.code())), svg.as_bytes())?;
        }
        write_atomic(&plots.join("speed.svg"), speed_svg(&speeds).as_bytes())?;
        for &gamma in &cfg.simulation.gamma_set {
            let svg = map_curves_svg(&rows, gamma);
            write_atomic(&plots.join(format!("map_gamma_{gamma}.svg")), svg.as_bytes())?;
        }
    }
    Ok(summary)
}
