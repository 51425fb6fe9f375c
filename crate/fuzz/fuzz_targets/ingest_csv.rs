#![no_main]

use libfuzzer_sys::fuzz_target;
use lidbench::records::{ingest_records, RecordFormat};

fuzz_target!(|data: &[u8]| {
    let _ = ingest_records(data, RecordFormat::Csv);
});
