#![no_main]

use libfuzzer_sys::fuzz_target;
use scholmig::synthgen::GroundTruth;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(t) = GroundTruth::from_json(text) {
        let again = GroundTruth::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(again.n_events(), t.n_events());
    }
});
