#![no_main]

use libfuzzer_sys::fuzz_target;
use scholmig::country_infer::{decode_model, encode_model, predict_country};

fuzz_target!(|data: &[u8]| {
    let Ok(model) = decode_model(data) else {
        return;
    };
    let (_, p) = predict_country(&model, "10115 Berlin, Germany");
    assert!((0.0..=1.0).contains(&p) || p.is_nan());
    let bytes = encode_model(&model).expect("decoded model encodes");
    decode_model(&bytes).expect("re-encoded model decodes");
});
