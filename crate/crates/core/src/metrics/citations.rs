//! Academic age, citation rates, discipline normalization and tertile
//! groups.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{AuthorshipRecord, Corpus};
use crate::mobility::{group_by_author, MobilityClassification, MobilityType};
use crate::taxonomy_gender::{DisciplineAssignment, DisciplineLabel};

/// Years since first publication, floored at one.
pub fn academic_age(first_pub_year: i32, reference_year: i32) -> Result<i32> {
    if first_pub_year > reference_year {
        return Err(Error::FutureFirstPublication {
            first: first_pub_year,
            reference: reference_year,
        });
    }
    Ok((reference_year - first_pub_year).max(1))
}

pub fn annual_citation_rate(total_citations: u64, age: i32) -> Result<f64> {
    if age < 1 {
        return Err(Error::InvalidAge(age));
    }
    Ok(total_citations as f64 / age as f64)
}

pub fn discipline_normalized_rate(rate: f64, field_mean_among_migrants: f64) -> Result<f64> {
    if !(field_mean_among_migrants > 0.0) {
        return Err(Error::NonPositiveFieldMean(field_mean_among_migrants));
    }
    Ok(rate / field_mean_among_migrants)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CitationGroup {
    Low,
    Medium,
    High,
}

impl CitationGroup {
    pub const ALL: [CitationGroup; 3] = [
        CitationGroup::Low,
        CitationGroup::Medium,
        CitationGroup::High,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CitationGroup::Low => "low",
            CitationGroup::Medium => "medium",
            CitationGroup::High => "high",
        }
    }
}

impl fmt::Display for CitationGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CitationGroup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        CitationGroup::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| format!("unknown citation group {s:?}"))
    }
}

/// Sample quantile by linear interpolation between order statistics:
/// with `h = (n - 1) p`, `q = x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h])`.
/// `sorted` must be ascending and non-empty.
pub fn quantile_linear(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tertiles {
    pub t1: f64,
    pub t2: f64,
}

impl Tertiles {
    /// Low below `t1`, Medium on the closed interval `[t1, t2]`, High above.
    pub fn classify(&self, v: f64) -> CitationGroup {
        if v < self.t1 {
            CitationGroup::Low
        } else if v <= self.t2 {
            CitationGroup::Medium
        } else {
            CitationGroup::High
        }
    }
}

/// Tertile thresholds of the values and the group of each researcher.
/// `None` for an empty input.
pub fn citation_groups(
    normalized: &[(String, f64)],
) -> Option<(BTreeMap<String, CitationGroup>, Tertiles)> {
    if normalized.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = normalized.iter().map(|(_, v)| *v).collect();
    sorted.sort_by(f64::total_cmp);
    let tertiles = Tertiles {
        t1: quantile_linear(&sorted, 1.0 / 3.0),
        t2: quantile_linear(&sorted, 2.0 / 3.0),
    };
    let groups = normalized
        .iter()
        .map(|(id, v)| (id.clone(), tertiles.classify(*v)))
        .collect();
    Some((groups, tertiles))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CitationProfile {
    pub researcher_id: String,
    pub mobility_type: MobilityType,
    pub discipline: String,
    pub total_citations: u64,
    pub academic_age: i32,
    pub annual_rate: f64,
    pub discipline_normalized: Option<f64>,
    pub citation_group: Option<CitationGroup>,
}

/// Sum of citation counts over a researcher's distinct publications. When a
/// publication appears on several records (multiple affiliations) its
/// largest count is used once.
pub fn total_citations<'a, I>(records: I) -> u64
where
    I: IntoIterator<Item = &'a AuthorshipRecord>,
{
    let mut per_pub: HashMap<&str, u64> = HashMap::new();
    for r in records {
        let c = r.citation_count.max(0) as u64;
        let slot = per_pub.entry(r.publication_id.as_str()).or_default();
        *slot = (*slot).max(c);
    }
    per_pub.values().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CitationSummary {
    pub profiles: Vec<CitationProfile>,
    /// Mean annual rate of migrants per discipline label.
    pub migrant_means: BTreeMap<String, f64>,
    pub tertiles: Option<Tertiles>,
}

/// Citation profiles for every classified researcher.
///
/// The normalized rate divides by the mean annual rate of migrants sharing
/// the researcher's discipline label and is absent when that mean is zero
/// or undefined. Tertile groups are formed over migrants only.
pub fn citation_profiles(
    corpus: &Corpus,
    classes: &[MobilityClassification],
    assignments: &[DisciplineAssignment],
    reference_year: i32,
) -> Result<CitationSummary> {
    let groups: HashMap<&str, Vec<&AuthorshipRecord>> =
        group_by_author(corpus).into_iter().collect();
    let discipline: HashMap<&str, DisciplineLabel> = assignments
        .iter()
        .map(|a| (a.researcher_id.as_str(), a.discipline))
        .collect();

    let mut profiles = Vec::with_capacity(classes.len());
    for c in classes {
        let Some(records) = groups.get(c.researcher_id.as_str()) else {
            continue;
        };
        let first = records
            .iter()
            .map(|r| r.year)
            .min()
            .expect("non-empty group");
        let age = academic_age(first, reference_year)?;
        let total = total_citations(records.iter().copied());
        let label = discipline
            .get(c.researcher_id.as_str())
            .copied()
            .unwrap_or(DisciplineLabel::Multidisciplinary);
        profiles.push(CitationProfile {
            researcher_id: c.researcher_id.clone(),
            mobility_type: c.mobility_type,
            discipline: label.name().to_owned(),
            total_citations: total,
            academic_age: age,
            annual_rate: annual_citation_rate(total, age)?,
            discipline_normalized: None,
            citation_group: None,
        });
    }

    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for p in profiles.iter().filter(|p| p.mobility_type.is_migrant()) {
        let s = sums.entry(p.discipline.clone()).or_default();
        s.0 += p.annual_rate;
        s.1 += 1;
    }
    let migrant_means: BTreeMap<String, f64> = sums
        .into_iter()
        .map(|(d, (sum, n))| (d, sum / n as f64))
        .collect();

    for p in &mut profiles {
        if let Some(&mean) = migrant_means.get(&p.discipline) {
            p.discipline_normalized = discipline_normalized_rate(p.annual_rate, mean).ok();
        }
    }

    let migrant_values: Vec<(String, f64)> = profiles
        .iter()
        .filter(|p| p.mobility_type.is_migrant())
        .filter_map(|p| {
            p.discipline_normalized
                .map(|v| (p.researcher_id.clone(), v))
        })
        .collect();
    let tertiles = match citation_groups(&migrant_values) {
        Some((assigned, tertiles)) => {
            for p in &mut profiles {
                p.citation_group = assigned.get(&p.researcher_id).copied();
            }
            Some(tertiles)
        }
        None => None,
    };
    Ok(CitationSummary {
        profiles,
        migrant_means,
        tertiles,
    })
}
