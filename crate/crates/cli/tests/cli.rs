mod common;

use std::fs;

use common::{echo, files, run, Workspace, TIMINGS};
use lidbench::report::{best_table, read_best_table, read_exclusions, read_map_table, read_speeds};

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn evaluate_then_simulate_writes_every_artifact() {
    let ws = Workspace::new(64);
    let mut args = vec!["evaluate".to_string()];
    args.extend(ws.run_args("out"));
    args.extend(["--builtin".into(), ws.builtin("nb"), "--adapter".into(), echo("fixed", "--lang fr")]);
    let o = run(&ws, &args);
    assert!(o.status.success(), "{}", stderr(&o));

    let out = ws.path("out");
    for corpus in ["T", "A", "J", "G"] {
        for det in ["nb", "fixed"] {
            let p = out.join(format!("predictions/{det}_{corpus}.jsonl"));
            assert_eq!(fs::read_to_string(&p).unwrap().lines().count(), 64, "{}", p.display());
        }
        assert!(out.join(format!("corpora/{corpus}.jsonl")).exists());
    }
    for f in ["corpus_stats.csv", "confusion.csv", "timings.csv", "speeds.csv", "perf.csv", "excluded.csv", "rates/en.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let (_, speeds) = read_speeds(&fs::read_to_string(out.join("speeds.csv")).unwrap()).unwrap();
    assert_eq!(speeds.len(), 8);
    // 4 corpora × 2 detectors × 48 subgroups
    let confusion = fs::read_to_string(out.join("confusion.csv")).unwrap();
    assert_eq!(confusion.lines().count(), 1 + 8 * 48);

    let mut args = vec!["simulate".to_string()];
    args.extend(ws.run_args("out"));
    args.extend(["--draws".into(), "400".into(), "--seed".into(), "5".into()]);
    let o = run(&ws, &args);
    assert!(o.status.success(), "{}", stderr(&o));

    let map = read_map_table(&fs::read_to_string(out.join("map.csv")).unwrap()).unwrap();
    assert_eq!(map.len(), 8 * 7 * 4);
    let gammas: std::collections::BTreeSet<String> = map.iter().map(|r| r.gamma.to_string()).collect();
    assert_eq!(gammas.into_iter().collect::<Vec<_>>(), ["0", "0.5", "1", "2"]);
    let best = read_best_table(&fs::read_to_string(out.join("best.csv")).unwrap()).unwrap();
    assert_eq!(best, best_table(&map));
    assert_eq!(best.len(), 7 * 4 * 2);

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["draws"], 400);
    assert_eq!(summary["mixture_mode"], "weighted_sum");
    assert_eq!(summary["dropped_weight_rows"], 4);

    let plots = files(&out.join("plots"));
    assert_eq!(plots.len(), 12 + 1 + 4);
}

#[test]
fn no_plots_writes_tables_only() {
    let ws = Workspace::new(32);
    let mut args = vec!["run".to_string()];
    args.extend(ws.run_args("out"));
    args.extend(["--builtin".into(), ws.builtin("nb"), "--draws".into(), "200".into(), "--no-plots".into()]);
    let o = run(&ws, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(ws.path("out/map.csv").exists());
    assert!(!ws.path("out/plots").exists());
}

#[test]
fn failing_handshake_names_the_adapter() {
    let ws = Workspace::new(8);
    let mut args = vec!["evaluate".to_string()];
    args.extend(ws.run_args("out"));
    args.extend(["--adapter".into(), "flaky=echo garbage".into()]);
    let o = run(&ws, &args);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("flaky") && err.contains("detectors"), "{err}");
}

#[test]
fn incomplete_detector_is_excluded() {
    let ws = Workspace::new(16);
    let mut args = vec!["evaluate".to_string()];
    args.extend(ws.run_args("out"));
    args.extend([
        "--builtin".into(),
        ws.builtin("nb"),
        "--adapter".into(),
        echo("gappy", "--empty-for r3"),
    ]);
    let o = run(&ws, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let ex = read_exclusions(&fs::read_to_string(ws.path("out/excluded.csv")).unwrap()).unwrap();
    assert_eq!(ex.len(), 4);
    assert!(ex.iter().all(|e| e.detector == "gappy" && e.reason.contains("r3")));
    let (_, speeds) = read_speeds(&fs::read_to_string(ws.path("out/speeds.csv")).unwrap()).unwrap();
    assert_eq!(speeds.len(), 4);
    assert!(!ws.path("out/predictions/gappy_T.jsonl").exists());
}

#[test]
fn all_detectors_failing_is_a_detector_error() {
    let ws = Workspace::new(8);
    let mut args = vec!["evaluate".to_string()];
    args.extend(ws.run_args("out"));
    args.extend(["--adapter".into(), echo("gappy", "--empty-for r0")]);
    let o = run(&ws, &args);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("completeness"));
}

#[test]
fn simulate_before_evaluate_explains_itself() {
    let ws = Workspace::new(8);
    let mut args = vec!["simulate".to_string()];
    args.extend(ws.run_args("fresh"));
    let o = run(&ws, &args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("run `lidbench evaluate` first"), "{}", stderr(&o));
}

#[test]
fn exit_statuses() {
    let ws = Workspace::new(8);
    assert_eq!(ws.lidbench(&["--help"]).status.code(), Some(0));
    assert_eq!(ws.lidbench(&["--version"]).status.code(), Some(0));
    assert_eq!(ws.lidbench(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ws.lidbench(&["evaluate", "--draws", "x"]).status.code(), Some(1));
    // no detectors
    let mut args = vec!["evaluate".to_string()];
    args.extend(ws.run_args("out"));
    assert_eq!(run(&ws, &args).status.code(), Some(1));
    // unreadable records
    let o = ws.lidbench(&["evaluate", "--records", "nope.jsonl", "--out", "o", "--builtin", &ws.builtin("nb")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ingest"));
    // malformed records name the line
    fs::write(ws.path("bad.jsonl"), "{\"id\":\"1\",\"title\":\"x\",\"true_language\":\"en\"}\n{\"id\":\"2\"}\n").unwrap();
    let o = ws.lidbench(&["evaluate", "--records", "bad.jsonl", "--out", "o", "--builtin", &ws.builtin("nb")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn timing_override_and_config_file() {
    let ws = Workspace::new(16);
    fs::write(ws.path("timings.csv"), TIMINGS).unwrap();
    let config = format!(
        "records = \"records.jsonl\"\nweights = \"weights.csv\"\nout = \"cfg-out\"\ndraws = 300\nseed = 11\n\
         timings = \"timings.csv\"\nplots = false\n[builtins]\nCLD2 = \"model.json\"\nLangID = \"model.json\"\n"
    );
    fs::write(ws.path("run.toml"), config).unwrap();
    let o = ws.lidbench(&["run", "--config", ws.path("run.toml").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (times, speeds) = read_speeds(&fs::read_to_string(ws.path("cfg-out/speeds.csv")).unwrap()).unwrap();
    assert_eq!(times.len(), 8);
    let cld2_t = lidbench::ProcedureId::new("CLD2", lidbench::CorpusType::Titles);
    assert_eq!(times[&cld2_t], 0.07);
    assert_eq!(speeds[&cld2_t], 1.0);
    let timings = fs::read_to_string(ws.path("cfg-out/timings.csv")).unwrap();
    assert_eq!(timings, "corpus,CLD2,LangID\nT,0.07,3.82\nA,0.19,5.99\nJ,0.07,3.90\nG,0.13,4.91\n");

    // a detector missing from the timing table is an input error
    fs::write(ws.path("short.csv"), "corpus,CLD2\nT,1\nA,1\nJ,1\nG,1\n").unwrap();
    let o = ws.lidbench(&["evaluate", "--config", "run.toml", "--timings", "short.csv"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("LangID"));
}

#[test]
fn grouping_by_language_emits_per_language_counts() {
    let ws = Workspace::new(16);
    let mut args = vec!["run".to_string()];
    args.extend(ws.run_args("out"));
    args.extend([
        "--builtin".into(),
        ws.builtin("nb"),
        "--grouping".into(),
        "by_language".into(),
        "--draws".into(),
        "200".into(),
        "--no-plots".into(),
    ]);
    let o = run(&ws, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let confusion = fs::read_to_string(ws.path("out/confusion.csv")).unwrap();
    assert_eq!(confusion.lines().count(), 1 + 4 * 12);
}
