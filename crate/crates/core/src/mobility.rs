//! Per-year mode countries, migration events and mobility types.
//!
//! A researcher's affiliation country in a year is the set of countries
//! with the highest record count that year. A migration event happens when
//! the surviving anchor set from earlier years has no country in common
//! with the current year's mode set. Partial overlap (a tie year that still
//! contains the old country) narrows the anchor instead of triggering an
//! event.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::country::CountryCode;
use crate::error::{Error, Result};
use crate::ingest::{AuthorshipRecord, Corpus};

pub type ModeSet = BTreeSet<CountryCode>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YearCountryProfile {
    pub researcher_id: String,
    pub modes: BTreeMap<i32, ModeSet>,
    pub first_year: i32,
    pub last_year: i32,
}

impl YearCountryProfile {
    /// Build directly from per-year mode sets. Empty sets are dropped.
    pub fn from_modes(researcher_id: &str, modes: BTreeMap<i32, ModeSet>) -> Result<Self> {
        let modes: BTreeMap<i32, ModeSet> =
            modes.into_iter().filter(|(_, s)| !s.is_empty()).collect();
        let (Some(&first_year), Some(&last_year)) = (modes.keys().next(), modes.keys().next_back())
        else {
            return Err(Error::NoCountriedRecords(researcher_id.to_owned()));
        };
        Ok(YearCountryProfile {
            researcher_id: researcher_id.to_owned(),
            modes,
            first_year,
            last_year,
        })
    }

    pub fn ever_mode(&self, country: CountryCode) -> bool {
        self.modes.values().any(|s| s.contains(&country))
    }
}

/// Lexicographically smallest code in a non-empty set.
pub fn representative(set: &ModeSet) -> CountryCode {
    *set.iter().next().expect("mode sets are non-empty")
}

/// Tally countries per year and keep the argmax set. Records without a
/// country are ignored.
pub fn mode_countries_by_year<'a, I>(researcher_id: &str, records: I) -> Result<YearCountryProfile>
where
    I: IntoIterator<Item = &'a AuthorshipRecord>,
{
    let mut tally: BTreeMap<i32, BTreeMap<CountryCode, u32>> = BTreeMap::new();
    for r in records {
        if let Some(c) = r.country {
            *tally.entry(r.year).or_default().entry(c).or_default() += 1;
        }
    }
    let modes = tally
        .into_iter()
        .map(|(year, counts)| {
            let max = counts.values().copied().max().unwrap_or(0);
            let set = counts
                .into_iter()
                .filter(|&(_, n)| n == max)
                .map(|(c, _)| c)
                .collect();
            (year, set)
        })
        .collect();
    YearCountryProfile::from_modes(researcher_id, modes)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MigrationEvent {
    pub researcher_id: String,
    pub year: i32,
    pub origin: CountryCode,
    pub destination: CountryCode,
}

pub fn detect_migration_events(p: &YearCountryProfile) -> Vec<MigrationEvent> {
    let mut events = Vec::new();
    let mut years = p.modes.iter();
    let Some((_, first)) = years.next() else {
        return events;
    };
    let mut anchor = first.clone();
    for (&year, modes) in years {
        let surviving: ModeSet = anchor.intersection(modes).copied().collect();
        if surviving.is_empty() {
            events.push(MigrationEvent {
                researcher_id: p.researcher_id.clone(),
                year,
                origin: representative(&anchor),
                destination: representative(modes),
            });
            anchor = modes.clone();
        } else {
            anchor = surviving;
        }
    }
    events
}

/// Representatives of the first and last publishing years' mode sets.
pub fn academic_origin_destination(p: &YearCountryProfile) -> (CountryCode, CountryCode) {
    (
        representative(&p.modes[&p.first_year]),
        representative(&p.modes[&p.last_year]),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MobilityType {
    SinglePaperAuthor,
    NonMover,
    Immigrant,
    Emigrant,
    ReturnMigrant,
    Transient,
}

impl MobilityType {
    pub const ALL: [MobilityType; 6] = [
        MobilityType::SinglePaperAuthor,
        MobilityType::NonMover,
        MobilityType::Immigrant,
        MobilityType::Emigrant,
        MobilityType::ReturnMigrant,
        MobilityType::Transient,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MobilityType::SinglePaperAuthor => "single_paper_author",
            MobilityType::NonMover => "non_mover",
            MobilityType::Immigrant => "immigrant",
            MobilityType::Emigrant => "emigrant",
            MobilityType::ReturnMigrant => "return_migrant",
            MobilityType::Transient => "transient",
        }
    }

    /// The four internationally mobile types.
    pub fn is_migrant(&self) -> bool {
        matches!(
            self,
            MobilityType::Immigrant
                | MobilityType::Emigrant
                | MobilityType::ReturnMigrant
                | MobilityType::Transient
        )
    }
}

impl fmt::Display for MobilityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MobilityType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        MobilityType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown mobility type {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MobilityClassification {
    pub researcher_id: String,
    pub mobility_type: MobilityType,
    pub academic_origin: Option<CountryCode>,
    pub academic_destination: Option<CountryCode>,
}

/// Assign one of the six mobility types relative to `focal`.
///
/// Researchers with origin and destination both equal to `focal` and no
/// migration event are non-movers even when another country tied with
/// `focal` in some year: they never left.
pub fn classify_mobility<'a, I>(
    records: I,
    profile: &YearCountryProfile,
    events: &[MigrationEvent],
    focal: CountryCode,
) -> Result<MobilityClassification>
where
    I: IntoIterator<Item = &'a AuthorshipRecord>,
{
    if !profile.ever_mode(focal) {
        return Err(Error::NotLinkedToFocal {
            researcher: profile.researcher_id.clone(),
            focal: focal.to_string(),
        });
    }
    let publications: HashSet<&str> = records
        .into_iter()
        .map(|r| r.publication_id.as_str())
        .collect();
    let (origin, destination) = academic_origin_destination(profile);
    let only_focal = profile
        .modes
        .values()
        .all(|s| s.len() == 1 && s.contains(&focal));
    let mobility_type = if publications.len() == 1 {
        MobilityType::SinglePaperAuthor
    } else if only_focal {
        MobilityType::NonMover
    } else {
        match (origin == focal, destination == focal) {
            (false, true) => MobilityType::Immigrant,
            (true, false) => MobilityType::Emigrant,
            (true, true) if !events.is_empty() => MobilityType::ReturnMigrant,
            (true, true) => MobilityType::NonMover,
            (false, false) => MobilityType::Transient,
        }
    };
    Ok(MobilityClassification {
        researcher_id: profile.researcher_id.clone(),
        mobility_type,
        academic_origin: Some(origin),
        academic_destination: Some(destination),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MobilityOutput {
    /// Events of every researcher with at least one countried record,
    /// sorted by (researcher, year).
    pub events: Vec<MigrationEvent>,
    /// Classifications of researchers admitted under the focal country,
    /// sorted by researcher.
    pub classes: Vec<MobilityClassification>,
    /// Researchers with countried records who never had `focal` as a mode.
    pub not_admitted: usize,
    /// Researchers without any countried record.
    pub without_country: usize,
}

/// Group records by author id, preserving corpus order within a group, and
/// return the groups sorted by id.
pub fn group_by_author(corpus: &Corpus) -> Vec<(&str, Vec<&AuthorshipRecord>)> {
    let mut groups: HashMap<&str, Vec<&AuthorshipRecord>> = HashMap::new();
    for r in &corpus.records {
        groups.entry(r.author_id.as_str()).or_default().push(r);
    }
    let mut groups: Vec<_> = groups.into_iter().collect();
    groups.sort_unstable_by(|a, b| a.0.cmp(b.0));
    groups
}

enum Outcome {
    Admitted(Vec<MigrationEvent>, MobilityClassification),
    NotAdmitted(Vec<MigrationEvent>),
    NoCountry,
}

pub fn analyze_corpus(corpus: &Corpus, focal: CountryCode) -> MobilityOutput {
    let groups = group_by_author(corpus);
    let outcomes: Vec<Outcome> = groups
        .par_iter()
        .map(|(id, records)| {
            let Ok(profile) = mode_countries_by_year(id, records.iter().copied()) else {
                return Outcome::NoCountry;
            };
            let events = detect_migration_events(&profile);
            match classify_mobility(records.iter().copied(), &profile, &events, focal) {
                Ok(class) => Outcome::Admitted(events, class),
                Err(_) => Outcome::NotAdmitted(events),
            }
        })
        .collect();
    let mut out = MobilityOutput::default();
    for o in outcomes {
        match o {
            Outcome::Admitted(events, class) => {
                out.events.extend(events);
                out.classes.push(class);
            }
            Outcome::NotAdmitted(events) => {
                out.events.extend(events);
                out.not_admitted += 1;
            }
            Outcome::NoCountry => out.without_country += 1,
        }
    }
    out
}

pub const EVENTS_COLUMNS: [&str; 4] = ["researcher_id", "year", "origin", "destination"];
pub const CLASSES_COLUMNS: [&str; 4] = ["researcher_id", "mobility_type", "origin", "destination"];

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let found: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_owned()).collect();
    if found != expected {
        return Err(Error::BadHeader(format!(
            "expected {}, found {}",
            expected.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

fn parse_code(cell: &str, row: u64) -> Result<CountryCode> {
    CountryCode::new(cell.trim()).ok_or_else(|| Error::MalformedRow {
        row,
        reason: format!("bad country code {cell:?}"),
    })
}

pub fn write_events_csv<W: Write>(events: &[MigrationEvent], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(EVENTS_COLUMNS)?;
    for e in events {
        w.write_record([
            e.researcher_id.as_str(),
            &e.year.to_string(),
            e.origin.as_str(),
            e.destination.as_str(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<events>", e))
}

pub fn read_events_csv<R: Read>(r: R) -> Result<Vec<MigrationEvent>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    check_header(&mut rdr, &EVENTS_COLUMNS)?;
    let mut events = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let year = rec[1].trim().parse().map_err(|_| Error::MalformedRow {
            row,
            reason: format!("bad year {:?}", &rec[1]),
        })?;
        let origin = parse_code(&rec[2], row)?;
        let destination = parse_code(&rec[3], row)?;
        if origin == destination {
            return Err(Error::MalformedRow {
                row,
                reason: "origin equals destination".into(),
            });
        }
        events.push(MigrationEvent {
            researcher_id: rec[0].to_owned(),
            year,
            origin,
            destination,
        });
    }
    Ok(events)
}

pub fn write_classes_csv<W: Write>(classes: &[MobilityClassification], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(CLASSES_COLUMNS)?;
    for c in classes {
        w.write_record([
            c.researcher_id.as_str(),
            c.mobility_type.as_str(),
            c.academic_origin.as_ref().map_or("", CountryCode::as_str),
            c.academic_destination
                .as_ref()
                .map_or("", CountryCode::as_str),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<classes>", e))
}

pub fn read_classes_csv<R: Read>(r: R) -> Result<Vec<MobilityClassification>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    check_header(&mut rdr, &CLASSES_COLUMNS)?;
    let mut classes = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let mobility_type = rec[1]
            .trim()
            .parse()
            .map_err(|reason| Error::MalformedRow { row, reason })?;
        let opt_code = |cell: &str| -> Result<Option<CountryCode>> {
            if cell.trim().is_empty() {
                Ok(None)
            } else {
                parse_code(cell, row).map(Some)
            }
        };
        classes.push(MobilityClassification {
            researcher_id: rec[0].to_owned(),
            mobility_type,
            academic_origin: opt_code(&rec[2])?,
            academic_destination: opt_code(&rec[3])?,
        });
    }
    Ok(classes)
}
