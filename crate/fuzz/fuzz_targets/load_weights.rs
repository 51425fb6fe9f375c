#![no_main]

use libfuzzer_sys::fuzz_target;
use lidbench::{dirichlet_params, load_weights};

fuzz_target!(|data: &[u8]| {
    if let Ok(loaded) = load_weights(data) {
        let params = dirichlet_params(&loaded.weights);
        assert_eq!(params.len(), 48);
    }
});
