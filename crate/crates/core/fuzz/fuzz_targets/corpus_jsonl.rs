#![no_main]

use libfuzzer_sys::fuzz_target;
use scholmig::ingest::{read_jsonl, write_jsonl, IngestConfig};

fuzz_target!(|data: &[u8]| {
    let cfg = IngestConfig::default();
    let Ok((corpus, _)) = read_jsonl(data, &cfg) else {
        return;
    };
    let mut out = Vec::new();
    write_jsonl(&corpus, &mut out).expect("accepted records serialize");
    let (again, report) = read_jsonl(out.as_slice(), &cfg).expect("written corpus parses");
    assert_eq!(report.rejected, 0);
    assert_eq!(again.records, corpus.records);
});
