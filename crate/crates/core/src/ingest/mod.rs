//! Authorship-record data model, validation and the CSV / JSONL layouts.

mod config;
mod io;
pub mod name;
mod record;

pub use config::IngestConfig;
pub use io::{
    corpus_fingerprint, parse_corpus, read_csv, read_jsonl, write_corpus, write_csv, write_jsonl,
    CorpusFormat, ParseReport, RowReject, CSV_COLUMNS,
};
pub use name::normalize_name;
pub use record::{
    validate_record, AuthorshipRecord, Corpus, ValidationVerdict, Violation, YearWindow,
};
