#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use scholmig::disambig::ScoreTable;
use scholmig::ingest::IngestConfig;
use scholmig::report::PipelineConfig;
use scholmig::synthgen::SynthSpec;

fuzz_target!(|data: &[u8]| {
    let Some((&which, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    match which % 4 {
        0 => {
            let _ = IngestConfig::from_toml_str(text);
        }
        1 => {
            if let Ok(t) = ScoreTable::from_toml_str(text) {
                assert!(t.check().is_ok());
            }
        }
        2 => {
            if let Ok(s) = SynthSpec::from_toml_str(text) {
                assert!(s.check().is_ok());
            }
        }
        _ => {
            let _ = PipelineConfig::from_toml_str(text, Path::new("."));
        }
    }
});
