use lidbench::detect::{audit_completeness, DetectError};
use lidbench::{build_corpus, run_procedure, AnnotatedRecord, CorpusType, DetectorHandle};

const ID: &str = r#"id=$(printf '%s' "$line" | sed 's/^{"id":"\([^"]*\)".*/\1/')"#;

fn adapter(name: &str, body: &str) -> String {
    format!(
        r#"echo '{{"name":"{name}","languages":["en","fr"]}}'; n=0; while IFS= read -r line; do n=$((n+1)); {ID}; {body}; done"#
    )
}

fn answer(lang: &str) -> String {
    format!(r#"printf '{{"id":"%s","lang":"{lang}","conf":0.5}}\n' "$id""#)
}

fn records(n: usize) -> Vec<AnnotatedRecord> {
    (0..n)
        .map(|i| AnnotatedRecord::new(format!("r{i}"), format!("Title {i}"), None, None, "en").unwrap())
        .collect()
}

fn corpora(n: usize) -> Vec<Vec<lidbench::CorpusDocument>> {
    let recs = records(n);
    CorpusType::ALL.iter().map(|&c| build_corpus(&recs, c).unwrap()).collect()
}

#[test]
fn ordered_round_trip() {
    let h = DetectorHandle::external("fixed", adapter("fixed", &answer("en"))).unwrap();
    assert_eq!(
        h.declared_languages.as_ref().unwrap().iter().collect::<Vec<_>>(),
        ["en", "fr"]
    );
    let corpus = build_corpus(&records(200), CorpusType::Titles).unwrap();
    let run = run_procedure(&h, &corpus).unwrap();
    assert_eq!(run.predictions.len(), 200);
    for (doc, p) in corpus.iter().zip(&run.predictions) {
        assert_eq!(doc.record_id, p.record_id);
        assert_eq!(p.raw_language, "en");
        assert_eq!(p.confidence, Some(0.5));
    }
    let report = audit_completeness(&h, &corpora(20));
    assert!(report.complete);
    assert_eq!(report.runs.len(), 4);
}

#[test]
fn dies_mid_stream() {
    let body = format!(r#"if [ $n -gt 3 ]; then exit 1; fi; {}"#, answer("en"));
    let h = DetectorHandle::external("dies", adapter("dies", &body)).unwrap();
    let report = audit_completeness(&h, &corpora(10));
    assert!(!report.complete);
    assert_eq!(report.failures.len(), 4);
    assert!(report.runs.is_empty());
}

#[test]
fn empty_language_is_incomplete() {
    let body = format!(
        r#"if [ "$id" = r2 ]; then {}; else {}; fi"#,
        answer(""),
        answer("fr")
    );
    let h = DetectorHandle::external("gappy", adapter("gappy", &body)).unwrap();
    let report = audit_completeness(&h, &corpora(5));
    assert!(!report.complete);
    assert!(report
        .failures
        .iter()
        .all(|f| f.error == DetectError::EmptyPrediction { record_id: "r2".into() }));
}

#[test]
fn out_of_order_ids_are_protocol_errors() {
    let body = r#"printf '{"id":"zz","lang":"en","conf":null}\n'"#;
    let h = DetectorHandle::external("shuffled", adapter("shuffled", body)).unwrap();
    let corpus = build_corpus(&records(3), CorpusType::Titles).unwrap();
    let err = run_procedure(&h, &corpus).unwrap_err();
    assert!(matches!(err, DetectError::Protocol { ref detector, .. } if detector == "shuffled"), "{err}");
}

#[test]
fn nonzero_exit_after_answers_is_a_protocol_error() {
    let cmd = format!("{}; exit 5", adapter("grumpy", &answer("en")));
    // the probe itself sees the non-zero exit
    let err = DetectorHandle::external("grumpy", cmd).unwrap_err();
    assert!(matches!(err, DetectError::Protocol { .. }), "{err}");
}

#[test]
fn failed_handshake_names_the_adapter() {
    let err = DetectorHandle::external("broken", "echo not-json").unwrap_err();
    assert!(err.to_string().contains("broken"), "{err}");
    let err = DetectorHandle::external("missing", "exit 0").unwrap_err();
    assert!(err.to_string().contains("missing"), "{err}");
}

#[test]
fn texts_with_quotes_and_newlines_survive() {
    let recs = vec![AnnotatedRecord::new("q", "Say \"hi\"\nthere\t\\ ok", None, None, "en").unwrap()];
    let h = DetectorHandle::external("fixed", adapter("fixed", &answer("en"))).unwrap();
    let corpus = build_corpus(&recs, CorpusType::Greedy).unwrap();
    let run = run_procedure(&h, &corpus).unwrap();
    assert_eq!(run.predictions[0].raw_language, "en");
}
