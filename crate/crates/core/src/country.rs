//! ISO 3166-1 alpha-2 codes and the bundled name table.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ingest::name::fold_diacritics;

const COUNTRIES_CSV: &str = include_str!("data/countries.csv");

/// A two-letter uppercase country code.
///
/// Any two ASCII letters form a syntactically valid code; whether the code
/// is assigned is answered by [`CountryCode::is_known`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 2]);

impl CountryCode {
    pub fn new(code: &str) -> Option<Self> {
        match code.as_bytes() {
            [a, b] if a.is_ascii_alphabetic() && b.is_ascii_alphabetic() => Some(CountryCode([
                a.to_ascii_uppercase(),
                b.to_ascii_uppercase(),
            ])),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &str {
        // Both bytes are ASCII letters by construction.
        std::str::from_utf8(&self.0).expect("ascii")
    }

    pub fn is_known(&self) -> bool {
        table().by_code.contains_key(self)
    }

    /// English display name, if the code is assigned.
    pub fn name(&self) -> Option<&'static str> {
        table()
            .by_code
            .get(self)
            .map(|&i| table().entries[i].name.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CountryCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CountryCode::new(s.trim()).ok_or_else(|| format!("not a two-letter country code: {s:?}"))
    }
}

impl Serialize for CountryCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug)]
pub struct CountryEntry {
    pub code: CountryCode,
    pub name: String,
    pub aliases: Vec<String>,
}

#[derive(Debug)]
pub struct CountryTable {
    pub entries: Vec<CountryEntry>,
    by_code: HashMap<CountryCode, usize>,
    by_name: HashMap<String, CountryCode>,
}

fn name_key(name: &str) -> String {
    fold_diacritics(&name.trim().to_lowercase())
}

pub fn table() -> &'static CountryTable {
    static TABLE: OnceLock<CountryTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rdr = csv::Reader::from_reader(COUNTRIES_CSV.as_bytes());
        let mut entries = Vec::new();
        for row in rdr.records() {
            let row = row.expect("bundled country table is valid CSV");
            let code = CountryCode::new(&row[0]).expect("bundled code");
            let aliases = row[2]
                .split('|')
                .filter(|a| !a.is_empty())
                .map(str::to_owned)
                .collect();
            entries.push(CountryEntry {
                code,
                name: row[1].to_owned(),
                aliases,
            });
        }
        let mut by_code = HashMap::new();
        let mut by_name = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_code.insert(e.code, i);
        }
        // Canonical names win over aliases when both spellings collide.
        for e in &entries {
            for a in &e.aliases {
                by_name.insert(name_key(a), e.code);
            }
        }
        for e in &entries {
            by_name.insert(name_key(&e.name), e.code);
        }
        CountryTable {
            entries,
            by_code,
            by_name,
        }
    })
}

/// Resolve a country cell: an assigned alpha-2 code or a known name variant.
pub fn resolve(text: &str) -> Option<CountryCode> {
    let t = text.trim();
    if let Some(code) = CountryCode::new(t) {
        if code.is_known() {
            return Some(code);
        }
    }
    table().by_name.get(&name_key(t)).copied()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_all_assigned_codes() {
        assert_eq!(table().entries.len(), 249);
        assert!(CountryCode::new("DE").unwrap().is_known());
        assert!(!CountryCode::new("XX").unwrap().is_known());
    }

    #[test]
    fn name_variants_resolve() {
        assert_eq!(resolve("Germany").unwrap().as_str(), "DE");
        assert_eq!(resolve("UK").unwrap().as_str(), "GB");
        assert_eq!(resolve("usa").unwrap().as_str(), "US");
        assert_eq!(resolve("Österreich").unwrap().as_str(), "AT");
        assert_eq!(resolve("de").unwrap().as_str(), "DE");
        assert_eq!(resolve("Narnia"), None);
    }

    #[test]
    fn rejects_non_letters() {
        assert!(CountryCode::new("D1").is_none());
        assert!(CountryCode::new("DEU").is_none());
        assert!(CountryCode::new("").is_none());
    }
}
