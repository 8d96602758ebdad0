#![no_main]

use libfuzzer_sys::fuzz_target;
use scholmig::taxonomy_gender::{infer_gender, GenderGates, NameGenderTable};

fuzz_target!(|data: &[u8]| {
    let Ok(table) = NameGenderTable::from_csv_reader(data) else {
        return;
    };
    for (name, entry) in table.iter() {
        assert!((0.0..=1.0).contains(&entry.probability));
        let _ = infer_gender(name, &table, GenderGates::default());
    }
});
