#![no_main]

use libfuzzer_sys::fuzz_target;
use lidbench::report::read_perf;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = read_perf(text);
    }
});
