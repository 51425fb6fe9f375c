use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// Writes `bytes` to a sibling temporary file, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let fail = |e: std::io::Error| CliError::internal("output", format!("cannot write {}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(fail)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(fail)?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(fail)?;
    drop(f);
    fs::rename(&tmp, path).map_err(fail)
}

/// Artifact paths under an output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn corpus_stats(&self) -> PathBuf {
        self.root.join("corpus_stats.csv")
    }

    pub fn corpus_dump(&self, corpus: &str) -> PathBuf {
        self.root.join("corpora").join(format!("{corpus}.jsonl"))
    }

    pub fn predictions(&self, detector: &str, corpus: &str) -> PathBuf {
        self.root.join("predictions").join(format!("{detector}_{corpus}.jsonl"))
    }

    pub fn confusion(&self) -> PathBuf {
        self.root.join("confusion.csv")
    }

    pub fn timings(&self) -> PathBuf {
        self.root.join("timings.csv")
    }

    pub fn speeds(&self) -> PathBuf {
        self.root.join("speeds.csv")
    }

    pub fn perf(&self) -> PathBuf {
        self.root.join("perf.csv")
    }

    pub fn rates(&self, language: &str) -> PathBuf {
        self.root.join("rates").join(format!("{language}.csv"))
    }

    pub fn exclusions(&self) -> PathBuf {
        self.root.join("excluded.csv")
    }

    pub fn map(&self) -> PathBuf {
        self.root.join("map.csv")
    }

    pub fn best(&self) -> PathBuf {
        self.root.join("best.csv")
    }

    pub fn summary(&self) -> PathBuf {
        self.root.join("summary.json")
    }

    pub fn plots(&self) -> PathBuf {
        self.root.join("plots")
    }
}
