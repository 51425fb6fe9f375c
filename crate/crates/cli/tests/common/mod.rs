#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const LIDBENCH: &str = env!("CARGO_BIN_EXE_lidbench");
pub const ECHO: &str = env!("CARGO_BIN_EXE_echo-adapter");

pub const WEIGHTS: &str = include_str!("../../../core/tests/fixtures/weights.csv");
pub const TIMINGS: &str = include_str!("../../../core/tests/fixtures/timings.csv");

const WORDS: [(&str, &[&str]); 4] = [
    ("en", &["the", "study", "of", "water", "and", "health", "with", "children"]),
    ("fr", &["la", "étude", "des", "eaux", "et", "santé", "avec", "enfants"]),
    ("de", &["die", "untersuchung", "der", "wasser", "und", "gesundheit", "mit", "kindern"]),
    ("es", &["el", "estudio", "del", "agua", "y", "salud", "con", "niños"]),
];

fn phrase(words: &[&str], i: usize, len: usize) -> String {
    (0..len).map(|k| words[(i * 7 + k * 3) % words.len()]).collect::<Vec<_>>().join(" ")
}

/// Small labelled sample in four languages covering all four metadata
/// configurations.
pub fn records_jsonl(n: usize) -> String {
    let mut out = String::new();
    for i in 0..n {
        let (lang, words) = WORDS[i % WORDS.len()];
        let abs = (i / 4 % 2 == 0).then(|| phrase(words, i, 12));
        let journal = (i / 8 % 2 == 0).then(|| format!("Journal {}", phrase(words, i + 1, 2)));
        let row = serde_json::json!({
            "id": format!("r{i}"),
            "title": phrase(words, i, 5),
            "abstract": abs,
            "journal_name": journal,
            "true_language": lang,
        });
        out.push_str(&row.to_string());
        out.push('\n');
    }
    out
}

pub fn seeds_jsonl() -> String {
    let mut out = String::new();
    for (lang, words) in WORDS {
        for i in 0..4 {
            let row = serde_json::json!({"language": lang, "text": phrase(words, i, 8)});
            out.push_str(&row.to_string());
            out.push('\n');
        }
    }
    out
}

/// A working directory with records, seeds, weights and a trained model.
pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new(records: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("records.jsonl"), records_jsonl(records)).unwrap();
        fs::write(dir.path().join("seeds.jsonl"), seeds_jsonl()).unwrap();
        fs::write(dir.path().join("weights.csv"), WEIGHTS).unwrap();
        let ws = Self { dir };
        let out = ws.lidbench(&[
            "train",
            "--input",
            ws.path("seeds.jsonl").to_str().unwrap(),
            "--output",
            ws.path("model.json").to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        ws
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn lidbench(&self, args: &[&str]) -> Output {
        Command::new(LIDBENCH).args(args).current_dir(self.dir.path()).output().unwrap()
    }

    /// Common flags for evaluate/simulate/run against `out`.
    pub fn run_args(&self, out: &str) -> Vec<String> {
        vec![
            "--records".into(),
            self.path("records.jsonl").display().to_string(),
            "--weights".into(),
            self.path("weights.csv").display().to_string(),
            "--out".into(),
            self.path(out).display().to_string(),
        ]
    }

    pub fn builtin(&self, name: &str) -> String {
        format!("{name}={}", self.path("model.json").display())
    }
}

pub fn echo(name: &str, extra: &str) -> String {
    format!("{name}={ECHO} --name {name} {extra}")
}

pub fn run(ws: &Workspace, args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    ws.lidbench(&refs)
}

/// Every file below `root`, as sorted relative paths.
pub fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}
