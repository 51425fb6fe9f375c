#![no_main]

use libfuzzer_sys::fuzz_target;
use lidbench::report::read_corpus_stats;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = read_corpus_stats(text);
    }
});
