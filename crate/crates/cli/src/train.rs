//! `lidbench train`: builds an n-gram model from labelled seed text.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use lidbench::train_ngram_model;
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::output::write_atomic;

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// JSON Lines of {"language": ..., "text": ...}
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Model file to write
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub min_n: usize,
    #[arg(long, default_value_t = 3)]
    pub max_n: usize,
}

#[derive(Deserialize)]
struct Seed {
    language: String,
    text: String,
}

const STAGE: &str = "train";

pub fn parse_seeds(text: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let mut seeds: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let seed: Seed =
            serde_json::from_str(line).map_err(|e| CliError::input(STAGE, format!("line {}: {e}", i + 1)))?;
        seeds.entry(seed.language).or_default().push(seed.text);
    }
    Ok(seeds)
}

/// Returns the number of languages in the written model.
pub fn cmd_train(args: &TrainArgs) -> Result<usize> {
    let text = fs::read_to_string(&args.input).map_err(|e| CliError::read(STAGE, &args.input, e))?;
    let seeds = parse_seeds(&text)?;
    let model = train_ngram_model(&seeds, (args.min_n, args.max_n)).map_err(|e| CliError::input(STAGE, e))?;
    write_atomic(&args.output, model.to_json().as_bytes())?;
    Ok(model.languages().len())
}
