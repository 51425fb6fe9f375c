#![no_main]

use libfuzzer_sys::fuzz_target;
use lidbench::NgramModel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = NgramModel::from_json(text) {
        let _ = lidbench::ngram_detect(&model, "Une étude de la santé.");
    }
});
