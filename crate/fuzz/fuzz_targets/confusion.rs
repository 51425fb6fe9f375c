#![no_main]

use libfuzzer_sys::fuzz_target;
use lidbench::report::{read_confusions, write_confusions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(counts) = read_confusions(text) {
        let again = read_confusions(std::str::from_utf8(&write_confusions(&counts)).unwrap()).unwrap();
        assert_eq!(again, counts);
    }
});
