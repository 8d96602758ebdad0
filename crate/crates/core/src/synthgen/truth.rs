use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::country::CountryCode;
use crate::error::{Error, Result};
use crate::mobility::MobilityType;
use crate::taxonomy_gender::Gender;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearModes {
    pub year: i32,
    pub countries: Vec<CountryCode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TrueEvent {
    pub year: i32,
    pub origin: CountryCode,
    pub destination: CountryCode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonTruth {
    pub person: usize,
    pub author_id: String,
    pub given_name: String,
    pub surname: String,
    pub gender: Gender,
    pub discipline: String,
    /// `None` for persons never affiliated with the focal country.
    pub mobility_type: Option<MobilityType>,
    pub trajectory: Vec<YearModes>,
    pub events: Vec<TrueEvent>,
    pub n_records: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub author_id: String,
    pub persons: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Fingerprint of the emitted corpus.
    pub run_id: String,
    pub seed: u64,
    pub focal: CountryCode,
    pub n_records: usize,
    pub persons: Vec<PersonTruth>,
    pub record_person: BTreeMap<String, usize>,
    pub collisions: Vec<Collision>,
    /// True country of every record whose country was removed.
    pub masked: BTreeMap<String, CountryCode>,
}

impl GroundTruth {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: GroundTruth = serde_json::from_str(s)?;
        if t.persons.iter().enumerate().any(|(i, p)| p.person != i) {
            return Err(Error::InvalidSpec(
                "truth persons are not numbered 0..n".into(),
            ));
        }
        if t.record_person.values().any(|p| *p >= t.persons.len()) {
            return Err(Error::InvalidSpec(
                "truth maps a record to an unknown person".into(),
            ));
        }
        Ok(t)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn n_events(&self) -> usize {
        self.persons.iter().map(|p| p.events.len()).sum()
    }
}
