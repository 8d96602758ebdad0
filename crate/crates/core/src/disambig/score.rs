//! Rule-based pairwise similarity between two records of one author ID.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::name::{first_initial, normalize_name};
use crate::ingest::AuthorshipRecord;

/// Weights of the similarity rules. Capped rules contribute
/// `min(per_item * shared, cap)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreTable {
    pub name_exact: f64,
    pub name_compatible: f64,
    pub per_shared_coauthor: f64,
    pub coauthor_cap: f64,
    pub per_shared_asjc_2digit: f64,
    pub asjc_cap: f64,
    pub shared_funding_text: f64,
    pub per_shared_grant: f64,
    pub grant_cap: f64,
}

impl Default for ScoreTable {
    fn default() -> Self {
        ScoreTable {
            name_exact: 2.0,
            name_compatible: 1.0,
            per_shared_coauthor: 2.0,
            coauthor_cap: 6.0,
            per_shared_asjc_2digit: 1.0,
            asjc_cap: 3.0,
            shared_funding_text: 2.0,
            per_shared_grant: 5.0,
            grant_cap: 10.0,
        }
    }
}

impl ScoreTable {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let t: ScoreTable = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        t.check()?;
        Ok(t)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&s)
    }

    /// Every weight must be finite and non-negative so that scores stay in
    /// `[0, inf)` and distances in `(0, 1]`.
    pub fn check(&self) -> Result<()> {
        let all = [
            self.name_exact,
            self.name_compatible,
            self.per_shared_coauthor,
            self.coauthor_cap,
            self.per_shared_asjc_2digit,
            self.asjc_cap,
            self.shared_funding_text,
            self.per_shared_grant,
            self.grant_cap,
        ];
        if all.iter().all(|w| w.is_finite() && *w >= 0.0) {
            Ok(())
        } else {
            Err(Error::Config(
                "score weights must be finite and non-negative".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Similarity {
    Score(f64),
    /// The given names rule out the same person.
    ForcedDistinct,
}

impl Similarity {
    /// `1 / (1 + score)`, or the maximal distance 1.0.
    pub fn distance(self) -> f64 {
        match self {
            Similarity::Score(s) => 1.0 / (1.0 + s),
            Similarity::ForcedDistinct => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum NameForm {
    Full(String),
    Initial(char),
    Empty,
}

impl NameForm {
    pub(crate) fn of(given: &str) -> Self {
        let key = normalize_name(given);
        if !key.is_empty() {
            NameForm::Full(key)
        } else {
            first_initial(given).map_or(NameForm::Empty, NameForm::Initial)
        }
    }
}

enum NameMatch {
    Exact,
    Compatible,
    Neutral,
    Incompatible,
}

fn compare_names(a: &NameForm, b: &NameForm) -> NameMatch {
    use NameForm::*;
    match (a, b) {
        (Full(x), Full(y)) if x == y => NameMatch::Exact,
        (Full(_), Full(_)) => NameMatch::Incompatible,
        (Full(f), Initial(c)) | (Initial(c), Full(f)) => {
            if f.starts_with(*c) {
                NameMatch::Compatible
            } else {
                NameMatch::Incompatible
            }
        }
        (Initial(x), Initial(y)) if x == y => NameMatch::Compatible,
        (Initial(_), Initial(_)) => NameMatch::Incompatible,
        (Empty, _) | (_, Empty) => NameMatch::Neutral,
    }
}

/// Comparison features of one record, precomputed once per record.
#[derive(Debug, Clone)]
pub(crate) struct Features {
    name: NameForm,
    coauthors: Vec<String>,
    asjc_prefixes: Vec<u16>,
    funding: Vec<String>,
    grants: Vec<String>,
}

fn sorted_dedup<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort_unstable();
    v.dedup();
    v
}

impl Features {
    pub(crate) fn of(r: &AuthorshipRecord) -> Self {
        Features {
            name: NameForm::of(&r.given_name),
            coauthors: sorted_dedup(r.coauthor_ids.clone()),
            asjc_prefixes: sorted_dedup(r.asjc_codes.iter().map(|c| c / 100).collect()),
            funding: sorted_dedup(
                r.funding_texts
                    .iter()
                    .map(|t| {
                        t.split_whitespace()
                            .collect::<Vec<_>>()
                            .join(" ")
                            .to_lowercase()
                    })
                    .filter(|t| !t.is_empty())
                    .collect(),
            ),
            grants: sorted_dedup(
                r.grant_numbers
                    .iter()
                    .map(|g| g.trim().to_owned())
                    .collect(),
            ),
        }
    }
}

/// Size of the intersection of two sorted, deduplicated slices.
fn shared<T: Ord>(a: &[T], b: &[T]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub(crate) fn similarity_of(a: &Features, b: &Features, w: &ScoreTable) -> Similarity {
    let name = match compare_names(&a.name, &b.name) {
        NameMatch::Incompatible => return Similarity::ForcedDistinct,
        NameMatch::Exact => w.name_exact,
        NameMatch::Compatible => w.name_compatible,
        NameMatch::Neutral => 0.0,
    };
    let capped = |per: f64, n: usize, cap: f64| (per * n as f64).min(cap);
    let coauthors = capped(
        w.per_shared_coauthor,
        shared(&a.coauthors, &b.coauthors),
        w.coauthor_cap,
    );
    let subjects = capped(
        w.per_shared_asjc_2digit,
        shared(&a.asjc_prefixes, &b.asjc_prefixes),
        w.asjc_cap,
    );
    let funding = if shared(&a.funding, &b.funding) > 0 {
        w.shared_funding_text
    } else {
        0.0
    };
    let grants = capped(
        w.per_shared_grant,
        shared(&a.grants, &b.grants),
        w.grant_cap,
    );
    Similarity::Score(name + coauthors + subjects + funding + grants)
}

/// Sum of rule contributions, or `ForcedDistinct` when the given names are
/// incompatible: two different full names, or initials that disagree.
pub fn pairwise_similarity(
    a: &AuthorshipRecord,
    b: &AuthorshipRecord,
    weights: &ScoreTable,
) -> Similarity {
    similarity_of(&Features::of(a), &Features::of(b), weights)
}
