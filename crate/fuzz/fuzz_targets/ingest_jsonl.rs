#![no_main]

use libfuzzer_sys::fuzz_target;
use lidbench::records::{ingest_records, write_records, RecordFormat};

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = ingest_records(data, RecordFormat::Jsonl) {
        let again = ingest_records(&write_records(&records, RecordFormat::Jsonl)[..], RecordFormat::Jsonl).unwrap();
        assert_eq!(again, records);
    }
});
