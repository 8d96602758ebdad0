#![no_main]

use libfuzzer_sys::fuzz_target;
use scholmig::mobility::{read_classes_csv, read_events_csv, write_classes_csv, write_events_csv};
use scholmig::taxonomy_gender::{read_assignments_csv, read_genders_csv, write_genders_csv};

fuzz_target!(|data: &[u8]| {
    let Some((&which, rest)) = data.split_first() else {
        return;
    };
    match which % 4 {
        0 => {
            if let Ok(events) = read_events_csv(rest) {
                let mut out = Vec::new();
                write_events_csv(&events, &mut out).unwrap();
                assert_eq!(read_events_csv(out.as_slice()).unwrap(), events);
            }
        }
        1 => {
            if let Ok(classes) = read_classes_csv(rest) {
                let mut out = Vec::new();
                write_classes_csv(&classes, &mut out).unwrap();
                assert_eq!(read_classes_csv(out.as_slice()).unwrap(), classes);
            }
        }
        2 => {
            let _ = read_assignments_csv(rest);
        }
        _ => {
            if let Ok(genders) = read_genders_csv(rest) {
                let mut out = Vec::new();
                write_genders_csv(&genders, &mut out).unwrap();
                assert_eq!(read_genders_csv(out.as_slice()).unwrap(), genders);
            }
        }
    }
});
