#![no_main]

use libfuzzer_sys::fuzz_target;
use scholmig::country;
use scholmig::country_infer::{tokenize_affiliation, tokens};
use scholmig::ingest::normalize_name;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let t = tokenize_affiliation(text, 1 << 16);
    assert!(t.features.len() <= t.tokens.len());
    assert!(t.features.iter().all(|&(i, c)| i < 1 << 16 && c > 0.0));
    assert_eq!(tokens(text), t.tokens);
    let key = normalize_name(text);
    assert_eq!(normalize_name(&key), key);
    let _ = country::resolve(text);
});
