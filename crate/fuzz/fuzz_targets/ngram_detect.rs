#![no_main]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use lidbench::detect::normalize_text;
use lidbench::{ngram_detect, train_ngram_model, NgramModel};

fn model() -> &'static NgramModel {
    static MODEL: OnceLock<NgramModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let seeds = [
            ("en", "the study of water and health"),
            ("fr", "une étude des eaux et de la santé"),
            ("ja", "水と健康に関する研究"),
        ];
        let seeds: BTreeMap<String, Vec<String>> =
            seeds.iter().map(|(l, t)| (l.to_string(), vec![t.to_string()])).collect();
        train_ngram_model(&seeds, (1, 3)).unwrap()
    })
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let norm = normalize_text(text);
    assert_eq!(norm.trim(), norm);
    assert!(!norm.contains("  "));
    if let Ok((lang, conf)) = ngram_detect(model(), text) {
        assert!(model().languages().contains(&lang));
        assert!((0.0..=1.0).contains(&conf));
    }
});
