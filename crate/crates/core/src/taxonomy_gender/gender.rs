//! Name-based binary gender labels from a local lookup table.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{normalize_name, AuthorshipRecord};

const BUNDLED_NAMES: &str = include_str!("../data/names.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl Gender {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "m" => Ok(Gender::Male),
            "female" | "f" => Ok(Gender::Female),
            "unknown" | "" => Ok(Gender::Unknown),
            other => Err(format!("unknown gender {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NameEntry {
    pub gender: Gender,
    pub probability: f64,
    pub count: u64,
}

/// Lowercase first name to its most common gender.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NameGenderTable {
    entries: BTreeMap<String, NameEntry>,
}

impl NameGenderTable {
    /// Parse `name,gender,probability,count`. Duplicate names, probabilities
    /// outside [0, 1] and genders other than male/female are errors.
    pub fn from_csv_reader<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header != ["name", "gender", "probability", "count"] {
            return Err(Error::BadHeader(format!(
                "expected name,gender,probability,count, found {}",
                header.join(",")
            )));
        }
        let mut entries = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec.position().map_or(0, |p| p.line());
            let bad = |reason: String| Error::MalformedRow { row, reason };
            let name = rec[0].to_lowercase();
            if name.is_empty() {
                return Err(bad("empty name".into()));
            }
            let gender: Gender = rec[1].parse().map_err(bad)?;
            if gender == Gender::Unknown {
                return Err(bad(format!("gender must be male or female for {name}")));
            }
            let probability: f64 = rec[2]
                .parse()
                .map_err(|_| bad(format!("bad probability {:?}", &rec[2])))?;
            if !(0.0..=1.0).contains(&probability) {
                return Err(bad(format!("probability {probability} outside [0, 1]")));
            }
            let count: u64 = rec[3]
                .parse()
                .map_err(|_| bad(format!("bad count {:?}", &rec[3])))?;
            let entry = NameEntry {
                gender,
                probability,
                count,
            };
            if entries.insert(name.clone(), entry).is_some() {
                return Err(bad(format!("duplicate name {name}")));
            }
        }
        Ok(NameGenderTable { entries })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(std::io::BufReader::new(f))
    }

    /// The table shipped with the crate, also used as the synthetic name pool.
    pub fn bundled() -> Self {
        Self::from_csv_reader(BUNDLED_NAMES.as_bytes()).expect("bundled name table is valid")
    }

    pub fn get(&self, key: &str) -> Option<&NameEntry> {
        self.entries.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &NameEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Confidence gates for a table hit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenderGates {
    pub p_min: f64,
    pub c_min: u64,
}

impl Default for GenderGates {
    fn default() -> Self {
        GenderGates {
            p_min: 0.6,
            c_min: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderSource {
    Table,
    Unknown,
}

impl GenderSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            GenderSource::Table => "table",
            GenderSource::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderRecord {
    pub researcher_id: String,
    pub gender: Gender,
    pub source: GenderSource,
}

/// Gender for one given-name field: the normalized key must be in the
/// table with probability >= `p_min` and count >= `c_min`.
pub fn infer_gender(
    given_name: &str,
    table: &NameGenderTable,
    gates: GenderGates,
) -> (Gender, GenderSource) {
    let key = normalize_name(given_name);
    match table.get(&key) {
        Some(e) if e.probability >= gates.p_min && e.count >= gates.c_min => {
            (e.gender, GenderSource::Table)
        }
        _ => (Gender::Unknown, GenderSource::Unknown),
    }
}

/// The most frequent non-empty name key across a researcher's records;
/// ties go to the lexicographically smallest key.
pub fn researcher_name_key<'a, I>(records: I) -> String
where
    I: IntoIterator<Item = &'a AuthorshipRecord>,
{
    let mut counts: HashMap<String, usize> = HashMap::new();
    for r in records {
        let key = normalize_name(&r.given_name);
        if !key.is_empty() {
            *counts.entry(key).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
        .map(|(k, _)| k)
        .unwrap_or_default()
}

pub fn infer_researcher_gender<'a, I>(
    researcher_id: &str,
    records: I,
    table: &NameGenderTable,
    gates: GenderGates,
) -> GenderRecord
where
    I: IntoIterator<Item = &'a AuthorshipRecord>,
{
    let key = researcher_name_key(records);
    let (gender, source) = infer_gender(&key, table, gates);
    GenderRecord {
        researcher_id: researcher_id.to_owned(),
        gender,
        source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> NameGenderTable {
        NameGenderTable::from_csv_reader(
            "name,gender,probability,count\nanna,female,0.98,10000\nmichael,male,0.99,50000\nkim,female,0.52,9000\nthorolf,male,1.0,2\n"
                .as_bytes(),
        )
        .unwrap()
    }

    #[test]
    fn direct_hit() {
        assert_eq!(
            infer_gender("Anna", &table(), GenderGates::default()),
            (Gender::Female, GenderSource::Table)
        );
    }

    #[test]
    fn absent_name_is_unknown() {
        assert_eq!(
            infer_gender("Zebulon", &table(), GenderGates::default()).0,
            Gender::Unknown
        );
        assert_eq!(
            infer_gender("", &table(), GenderGates::default()).0,
            Gender::Unknown
        );
    }

    #[test]
    fn middle_initial_is_dropped_before_lookup() {
        let t = table();
        let expected = t.get(&normalize_name("J. Michael")).unwrap().gender;
        assert_eq!(
            infer_gender("J. Michael", &t, GenderGates::default()).0,
            expected
        );
        assert_eq!(expected, Gender::Male);
    }

    #[test]
    fn gates_apply() {
        let t = table();
        assert_eq!(
            infer_gender("Kim", &t, GenderGates::default()).0,
            Gender::Unknown
        );
        assert_eq!(
            infer_gender("Thorolf", &t, GenderGates::default()).0,
            Gender::Unknown
        );
        let loose = GenderGates {
            p_min: 0.5,
            c_min: 1,
        };
        assert_eq!(infer_gender("Kim", &t, loose).0, Gender::Female);
        assert_eq!(infer_gender("Thorolf", &t, loose).0, Gender::Male);
    }

    #[test]
    fn table_errors() {
        for bad in [
            "name,gender\nanna,female\n",
            "name,gender,probability,count\nanna,female,1.5,10\n",
            "name,gender,probability,count\nanna,other,0.9,10\n",
            "name,gender,probability,count\nanna,female,0.9,-1\n",
            "name,gender,probability,count\nanna,female,0.9,1\nanna,male,0.9,1\n",
        ] {
            assert!(
                NameGenderTable::from_csv_reader(bad.as_bytes()).is_err(),
                "{bad}"
            );
        }
    }

    #[test]
    fn bundled_table_loads() {
        let t = NameGenderTable::bundled();
        assert!(t.len() > 150);
        assert_eq!(t.get("anna").unwrap().gender, Gender::Female);
    }

    #[test]
    fn researcher_key_prefers_full_names() {
        let mut a = crate::ingest::AuthorshipRecord {
            record_id: "1".into(),
            author_id: "a".into(),
            publication_id: "p".into(),
            year: 2000,
            affiliation_text: String::new(),
            country: None,
            asjc_codes: vec![],
            citation_count: 0,
            given_name: "M.".into(),
            surname: "S".into(),
            coauthor_ids: vec![],
            funding_texts: vec![],
            grant_numbers: vec![],
            country_imputed: false,
        };
        let mut b = a.clone();
        b.given_name = "Michael".into();
        let mut c = a.clone();
        c.given_name = "M. Michael".into();
        a.record_id = "0".into();
        assert_eq!(researcher_name_key([&a, &b, &c]), "michael");
    }
}
