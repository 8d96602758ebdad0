//! CSV and JSONL corpus layouts.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::IngestConfig;
use super::record::{validate_record, AuthorshipRecord, Corpus};
use crate::country::{self, CountryCode};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 13] = [
    "record_id",
    "author_id",
    "publication_id",
    "year",
    "affiliation_text",
    "country",
    "asjc_codes",
    "citation_count",
    "given_name",
    "surname",
    "coauthor_ids",
    "funding_texts",
    "grant_numbers",
];

const LIST_SEP: char = '|';

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl CorpusFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
        {
            Some(e) if e == "csv" => Ok(CorpusFormat::Csv),
            Some(e) if e == "jsonl" || e == "ndjson" => Ok(CorpusFormat::Jsonl),
            _ => Err(Error::UnknownFormat(path.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowReject {
    /// 1-based line number in the source file.
    pub row: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParseReport {
    pub accepted: usize,
    pub rejected: usize,
    pub rejects: Vec<RowReject>,
}

/// Unvalidated cell values shared by both layouts.
struct RawFields<'a> {
    record_id: &'a str,
    author_id: &'a str,
    publication_id: &'a str,
    year: i32,
    affiliation_text: &'a str,
    country: Option<&'a str>,
    asjc_codes: Vec<u16>,
    citation_count: i64,
    given_name: &'a str,
    surname: &'a str,
    coauthor_ids: Vec<String>,
    funding_texts: Vec<String>,
    grant_numbers: Vec<String>,
}

fn build_record(raw: RawFields<'_>) -> std::result::Result<AuthorshipRecord, String> {
    if raw.record_id.is_empty() {
        return Err("empty record_id".into());
    }
    if raw.author_id.is_empty() {
        return Err("empty author_id".into());
    }
    let country = match raw.country.map(str::trim).filter(|c| !c.is_empty()) {
        None => None,
        Some(text) => match country::resolve(text).or_else(|| CountryCode::new(text)) {
            Some(c) => Some(c),
            None => return Err(format!("bad_country_code: {text:?}")),
        },
    };
    Ok(AuthorshipRecord {
        record_id: raw.record_id.to_owned(),
        author_id: raw.author_id.to_owned(),
        publication_id: raw.publication_id.to_owned(),
        year: raw.year,
        affiliation_text: raw.affiliation_text.to_owned(),
        country,
        asjc_codes: raw.asjc_codes,
        citation_count: raw.citation_count,
        given_name: raw.given_name.to_owned(),
        surname: raw.surname.to_owned(),
        coauthor_ids: raw.coauthor_ids,
        funding_texts: raw.funding_texts,
        grant_numbers: raw.grant_numbers,
        country_imputed: false,
    })
}

fn split_list(cell: &str) -> Vec<String> {
    cell.split(LIST_SEP)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

fn clean_list(items: Vec<String>) -> Vec<String> {
    items.into_iter().flat_map(|s| split_list(&s)).collect()
}

fn parse_asjc(cell: &str) -> std::result::Result<Vec<u16>, String> {
    cell.split(LIST_SEP)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            check_asjc(
                s.parse::<u16>()
                    .map_err(|_| format!("bad asjc code {s:?}"))?,
            )
        })
        .collect()
}

fn check_asjc(code: u16) -> std::result::Result<u16, String> {
    if (1000..=9999).contains(&code) {
        Ok(code)
    } else {
        Err(format!("asjc code {code} is not four digits"))
    }
}

/// Accumulates rows, enforcing validation, record-id uniqueness and the
/// malformed-row policy.
struct Collector {
    cfg: IngestConfig,
    corpus: Corpus,
    report: ParseReport,
    seen: HashSet<String>,
}

impl Collector {
    fn new(cfg: &IngestConfig) -> Self {
        Collector {
            cfg: cfg.clone(),
            corpus: Corpus::new(cfg.window, cfg.snapshot_date),
            report: ParseReport::default(),
            seen: HashSet::new(),
        }
    }

    fn push(
        &mut self,
        row: u64,
        built: std::result::Result<AuthorshipRecord, String>,
    ) -> Result<()> {
        let outcome = built.and_then(|r| {
            let verdict = validate_record(&r, self.cfg.window);
            if !verdict.is_valid() {
                let codes: Vec<String> = verdict.violations.iter().map(|v| v.to_string()).collect();
                return Err(codes.join(","));
            }
            if self.seen.contains(&r.record_id) {
                return Err(format!("duplicate record_id {}", r.record_id));
            }
            Ok(r)
        });
        match outcome {
            Ok(r) => {
                self.seen.insert(r.record_id.clone());
                self.corpus.records.push(r);
                self.report.accepted += 1;
                Ok(())
            }
            Err(reason) => {
                if self.cfg.strict {
                    return Err(Error::MalformedRow { row, reason });
                }
                self.report.rejected += 1;
                self.report.rejects.push(RowReject { row, reason });
                Ok(())
            }
        }
    }

    fn finish(self) -> (Corpus, ParseReport) {
        (self.corpus, self.report)
    }
}

fn csv_row(rec: &csv::StringRecord) -> std::result::Result<AuthorshipRecord, String> {
    if rec.len() != CSV_COLUMNS.len() {
        return Err(format!(
            "expected {} fields, found {}",
            CSV_COLUMNS.len(),
            rec.len()
        ));
    }
    let year = rec[3]
        .trim()
        .parse::<i32>()
        .map_err(|_| format!("bad year {:?}", &rec[3]))?;
    let citation_count = rec[7]
        .trim()
        .parse::<i64>()
        .map_err(|_| format!("bad citation_count {:?}", &rec[7]))?;
    build_record(RawFields {
        record_id: rec[0].trim(),
        author_id: rec[1].trim(),
        publication_id: rec[2].trim(),
        year,
        affiliation_text: &rec[4],
        country: Some(&rec[5]),
        asjc_codes: parse_asjc(&rec[6])?,
        citation_count,
        given_name: &rec[8],
        surname: &rec[9],
        coauthor_ids: split_list(&rec[10]),
        funding_texts: split_list(&rec[11]),
        grant_numbers: split_list(&rec[12]),
    })
}

pub fn read_csv<R: Read>(reader: R, cfg: &IngestConfig) -> Result<(Corpus, ParseReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != CSV_COLUMNS {
        return Err(Error::BadHeader(format!(
            "expected columns {}, found {}",
            CSV_COLUMNS.join(","),
            found.join(",")
        )));
    }
    let mut out = Collector::new(cfg);
    let mut rec = csv::StringRecord::new();
    loop {
        let row = rdr.position().line();
        match rdr.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => out.push(row, csv_row(&rec))?,
            // Invalid UTF-8 and similar per-row failures; the reader resyncs
            // at the next record.
            Err(e) if !matches!(e.kind(), csv::ErrorKind::Io(_)) => {
                out.push(row, Err(e.to_string()))?
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out.finish())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    record_id: String,
    author_id: String,
    publication_id: String,
    year: i32,
    #[serde(default)]
    affiliation_text: String,
    #[serde(default)]
    country: Option<String>,
    #[serde(default)]
    asjc_codes: Vec<u16>,
    citation_count: i64,
    #[serde(default)]
    given_name: String,
    surname: String,
    #[serde(default)]
    coauthor_ids: Vec<String>,
    #[serde(default)]
    funding_texts: Vec<String>,
    #[serde(default)]
    grant_numbers: Vec<String>,
}

fn json_row(line: &str) -> std::result::Result<AuthorshipRecord, String> {
    let row: JsonRow = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let asjc_codes = row
        .asjc_codes
        .into_iter()
        .map(check_asjc)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    build_record(RawFields {
        record_id: row.record_id.trim(),
        author_id: row.author_id.trim(),
        publication_id: row.publication_id.trim(),
        year: row.year,
        affiliation_text: &row.affiliation_text,
        country: row.country.as_deref(),
        asjc_codes,
        citation_count: row.citation_count,
        given_name: &row.given_name,
        surname: &row.surname,
        coauthor_ids: clean_list(row.coauthor_ids),
        funding_texts: clean_list(row.funding_texts),
        grant_numbers: clean_list(row.grant_numbers),
    })
}

pub fn read_jsonl<R: BufRead>(reader: R, cfg: &IngestConfig) -> Result<(Corpus, ParseReport)> {
    let mut out = Collector::new(cfg);
    for (i, line) in reader.split(b'\n').enumerate() {
        let row = i as u64 + 1;
        let line = line.map_err(|e| Error::io("<jsonl>", e))?;
        let built = match std::str::from_utf8(&line) {
            Ok(text) if text.trim().is_empty() => continue,
            Ok(text) => json_row(text),
            Err(e) => Err(e.to_string()),
        };
        out.push(row, built)?;
    }
    Ok(out.finish())
}

/// Read a corpus file. The layout is chosen by extension.
pub fn parse_corpus(path: &Path, cfg: &IngestConfig) -> Result<(Corpus, ParseReport)> {
    cfg.check()?;
    let format = CorpusFormat::from_path(path)?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let parsed = match format {
        CorpusFormat::Csv => read_csv(reader, cfg),
        CorpusFormat::Jsonl => read_jsonl(reader, cfg),
    };
    parsed.map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

fn join_list<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("|")
}

pub fn write_csv<W: Write>(corpus: &Corpus, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_COLUMNS)?;
    for r in &corpus.records {
        w.write_record([
            r.record_id.as_str(),
            &r.author_id,
            &r.publication_id,
            &r.year.to_string(),
            &r.affiliation_text,
            r.country.as_ref().map(CountryCode::as_str).unwrap_or(""),
            &join_list(&r.asjc_codes),
            &r.citation_count.to_string(),
            &r.given_name,
            &r.surname,
            &join_list(&r.coauthor_ids),
            &join_list(&r.funding_texts),
            &join_list(&r.grant_numbers),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_jsonl<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    for r in &corpus.records {
        let row = JsonRow {
            record_id: r.record_id.clone(),
            author_id: r.author_id.clone(),
            publication_id: r.publication_id.clone(),
            year: r.year,
            affiliation_text: r.affiliation_text.clone(),
            country: r.country.map(|c| c.to_string()),
            asjc_codes: r.asjc_codes.clone(),
            citation_count: r.citation_count,
            given_name: r.given_name.clone(),
            surname: r.surname.clone(),
            coauthor_ids: r.coauthor_ids.clone(),
            funding_texts: r.funding_texts.clone(),
            grant_numbers: r.grant_numbers.clone(),
        };
        serde_json::to_writer(&mut writer, &row)?;
        writer
            .write_all(b"\n")
            .map_err(|e| Error::io("<jsonl>", e))?;
    }
    Ok(())
}

pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let format = CorpusFormat::from_path(path)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        CorpusFormat::Csv => write_csv(corpus, &mut w)?,
        CorpusFormat::Jsonl => write_jsonl(corpus, &mut w)?,
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct HashWriter(Sha256);

impl Write for HashWriter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

/// SHA-256 (hex) of the corpus rendered as CSV. Identical for a corpus
/// read from CSV or JSONL, so it identifies a run's input independently
/// of file layout.
pub fn corpus_fingerprint(corpus: &Corpus) -> Result<String> {
    let mut h = HashWriter(Sha256::new());
    write_csv(corpus, &mut h)?;
    Ok(hex::encode(h.0.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::record::YearWindow;

    const HEADER: &str = "record_id,author_id,publication_id,year,affiliation_text,country,asjc_codes,citation_count,given_name,surname,coauthor_ids,funding_texts,grant_numbers\n";

    fn csv_of(rows: &[&str]) -> String {
        let mut s = HEADER.to_owned();
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    #[test]
    fn three_valid_rows() {
        let text = csv_of(&[
            "r1,a1,p1,2001,\"MPI, Rostock, Germany\",DE,\"3100|2200\",4,Anna,Schmidt,\"c1|c2\",,",
            "r2,a1,p2,2002,Berlin,Germany,,0,Anna,Schmidt,,DFG,G-1",
            "r3,a2,p3,2003,,,1300,7,,Meyer,,,",
        ]);
        let (corpus, report) = read_csv(text.as_bytes(), &IngestConfig::default()).unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(report.rejected, 0);
        let r1 = &corpus.records[0];
        assert_eq!(r1.asjc_codes, vec![3100, 2200]);
        assert_eq!(r1.coauthor_ids, vec!["c1", "c2"]);
        assert_eq!(corpus.records[1].country.unwrap().as_str(), "DE");
        assert_eq!(corpus.records[1].funding_texts, vec!["DFG"]);
        assert_eq!(corpus.records[2].country, None);
        assert!(corpus.records[2].coauthor_ids.is_empty());
    }

    #[test]
    fn year_outside_window_is_counted() {
        let text = csv_of(&[
            "r1,a1,p1,1802,x,DE,,0,A,B,,,",
            "r2,a1,p2,2001,x,DE,,0,A,B,,,",
        ]);
        let (corpus, report) = read_csv(text.as_bytes(), &IngestConfig::default()).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(report.rejected, 1);
        assert_eq!(report.rejects[0].row, 2);
        assert!(report.rejects[0].reason.contains("bad_year"));
    }

    #[test]
    fn strict_mode_reports_row_number() {
        let text = csv_of(&[
            "r1,a1,p1,2001,x,DE,,0,A,B,,,",
            "r2,a1,p2,2001,x,XX,,0,A,B,,,",
        ]);
        let cfg = IngestConfig {
            strict: true,
            ..IngestConfig::default()
        };
        match read_csv(text.as_bytes(), &cfg) {
            Err(Error::MalformedRow { row, reason }) => {
                assert_eq!(row, 3);
                assert!(reason.contains("bad_country_code"), "{reason}");
            }
            other => panic!("expected malformed row, got {other:?}"),
        }
    }

    #[test]
    fn malformed_cells_and_duplicates_rejected() {
        let text = csv_of(&[
            "r1,a1,p1,20x1,x,DE,,0,A,B,,,",
            "r2,a1,p2,2001,x,DE,31,0,A,B,,,",
            "r3,a1,p3,2001,x,DE,,-1,A,B,,,",
            "r4,a1,p4,2001,x,DE,,0,A,,,,",
            "r5,a1,p5,2001,x,Narnia,,0,A,B,,,",
            "r6,a1,p6,2001,x,DE,,0,A,B",
            "r7,a1,p7,2001,x,DE,,0,A,B,,,",
            "r7,a1,p8,2001,x,DE,,0,A,B,,,",
        ]);
        let (corpus, report) = read_csv(text.as_bytes(), &IngestConfig::default()).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(report.rejected, 7);
        assert_eq!(report.accepted, 1);
    }

    #[test]
    fn wrong_header_is_an_error() {
        let text = "record_id,author_id\nr1,a1\n";
        assert!(matches!(
            read_csv(text.as_bytes(), &IngestConfig::default()),
            Err(Error::BadHeader(_))
        ));
    }

    #[test]
    fn jsonl_layout() {
        let text = concat!(
            r#"{"record_id":"r1","author_id":"a1","publication_id":"p1","year":2001,"affiliation_text":"Rostock, Germany","country":"DE","asjc_codes":[3100],"citation_count":2,"given_name":"Anna","surname":"S","coauthor_ids":["c1"],"funding_texts":[],"grant_numbers":[]}"#,
            "\n\n",
            r#"{"record_id":"r2","author_id":"a1","publication_id":"p2","year":2001,"country":null,"citation_count":0,"surname":"S"}"#,
            "\n",
            r#"{"record_id":"r3","year":2001}"#,
            "\n",
        );
        let (corpus, report) = read_jsonl(text.as_bytes(), &IngestConfig::default()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(report.rejected, 1);
        assert_eq!(report.rejects[0].row, 4);
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(
            CorpusFormat::from_path(Path::new("a.CSV")).unwrap(),
            CorpusFormat::Csv
        );
        assert_eq!(
            CorpusFormat::from_path(Path::new("a.jsonl")).unwrap(),
            CorpusFormat::Jsonl
        );
        assert!(CorpusFormat::from_path(Path::new("a.xlsx")).is_err());
        assert!(parse_corpus(Path::new("/nonexistent/x.csv"), &IngestConfig::default()).is_err());
    }

    #[test]
    fn csv_write_then_read_is_identity() {
        let text = csv_of(&[
            "r1,a1,p1,2001,\"MPI, \"\"DR\"\", Germany\",DE,\"3100|2200\",4,Anna,Schmidt,\"c1|c2\",DFG,\"G1|G2\"",
            "r2,a2,p2,2002,,,,0,,Meyer,,,",
        ]);
        let cfg = IngestConfig {
            window: YearWindow::new(2000, 2010),
            ..IngestConfig::default()
        };
        let (corpus, _) = read_csv(text.as_bytes(), &cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&corpus, &mut buf).unwrap();
        let (again, _) = read_csv(buf.as_slice(), &cfg).unwrap();
        assert_eq!(corpus, again);
    }
}
