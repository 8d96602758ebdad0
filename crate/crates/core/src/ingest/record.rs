use std::collections::HashSet;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::country::CountryCode;

/// Inclusive range of publication years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearWindow {
    pub start_year: i32,
    pub end_year: i32,
}

impl YearWindow {
    pub fn new(start_year: i32, end_year: i32) -> Self {
        YearWindow {
            start_year,
            end_year,
        }
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start_year..=self.end_year).contains(&year)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start_year..=self.end_year
    }

    pub fn len(&self) -> i32 {
        (self.end_year - self.start_year + 1).max(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for YearWindow {
    fn default() -> Self {
        YearWindow::new(1996, 2020)
    }
}

/// One linkage between an author affiliation and a publication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorshipRecord {
    pub record_id: String,
    pub author_id: String,
    pub publication_id: String,
    pub year: i32,
    pub affiliation_text: String,
    pub country: Option<CountryCode>,
    pub asjc_codes: Vec<u16>,
    pub citation_count: i64,
    pub given_name: String,
    pub surname: String,
    pub coauthor_ids: Vec<String>,
    pub funding_texts: Vec<String>,
    pub grant_numbers: Vec<String>,
    /// Set when the country was predicted from the affiliation text rather
    /// than read from the source. Not part of the file layouts.
    #[serde(skip)]
    pub country_imputed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    BadYear,
    BadCountryCode,
    NegativeCitations,
    EmptySurname,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::BadYear => "bad_year",
            Violation::BadCountryCode => "bad_country_code",
            Violation::NegativeCitations => "negative_citations",
            Violation::EmptySurname => "empty_surname",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationVerdict {
    pub violations: Vec<Violation>,
}

impl ValidationVerdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_record(r: &AuthorshipRecord, window: YearWindow) -> ValidationVerdict {
    let mut violations = Vec::new();
    if !window.contains(r.year) {
        violations.push(Violation::BadYear);
    }
    if r.country.is_some_and(|c| !c.is_known()) {
        violations.push(Violation::BadCountryCode);
    }
    if r.citation_count < 0 {
        violations.push(Violation::NegativeCitations);
    }
    if r.surname.trim().is_empty() {
        violations.push(Violation::EmptySurname);
    }
    ValidationVerdict { violations }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub records: Vec<AuthorshipRecord>,
    pub window: YearWindow,
    pub snapshot_date: NaiveDate,
}

impl Corpus {
    pub fn new(window: YearWindow, snapshot_date: NaiveDate) -> Self {
        Corpus {
            records: Vec::new(),
            window,
            snapshot_date,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Check the container invariants: ordered window, unique record ids,
    /// every year inside the window.
    pub fn check(&self) -> Result<(), String> {
        if self.window.start_year > self.window.end_year {
            return Err(format!(
                "window start {} after end {}",
                self.window.start_year, self.window.end_year
            ));
        }
        let mut seen = HashSet::with_capacity(self.records.len());
        for r in &self.records {
            if !seen.insert(r.record_id.as_str()) {
                return Err(format!("duplicate record_id {}", r.record_id));
            }
            if !self.window.contains(r.year) {
                return Err(format!(
                    "record {} year {} outside window",
                    r.record_id, r.year
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) fn sample_record(id: &str) -> AuthorshipRecord {
    AuthorshipRecord {
        record_id: id.to_owned(),
        author_id: "a1".into(),
        publication_id: format!("p-{id}"),
        year: 2005,
        affiliation_text: "Dept. of Physics, Berlin, Germany".into(),
        country: CountryCode::new("DE"),
        asjc_codes: vec![3100],
        citation_count: 3,
        given_name: "Anna".into(),
        surname: "Schmidt".into(),
        coauthor_ids: vec![],
        funding_texts: vec![],
        grant_numbers: vec![],
        country_imputed: false,
    }
}
