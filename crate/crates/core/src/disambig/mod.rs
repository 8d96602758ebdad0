//! Author-ID disambiguation.
//!
//! IDs with too many countries or publications are flagged as suspicious.
//! The records of each suspicious ID are compared pairwise, turned into a
//! distance matrix and clustered; every cluster receives a revised ID. IDs
//! are only ever split, never merged with each other.

mod cluster;
mod score;

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cluster::{
    agglomerate, agglomerate_with_merges, build_distance_matrix, cluster_records,
    ClusterAssignment, Linkage, Merge, SimilarityMatrix,
};
pub use score::{pairwise_similarity, ScoreTable, Similarity};

use crate::error::{Error, Result};
use crate::ingest::Corpus;
use crate::mobility::group_by_author;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuspicionVerdict {
    pub author_id: String,
    pub n_countries: usize,
    pub n_publications: usize,
    pub suspicious: bool,
}

/// One verdict per author ID, sorted by ID. Thresholds are strict: an ID
/// is suspicious with more than `country_threshold` distinct countries or
/// more than `pub_threshold` distinct publications.
pub fn flag_suspicious(
    corpus: &Corpus,
    country_threshold: usize,
    pub_threshold: usize,
) -> Vec<SuspicionVerdict> {
    group_by_author(corpus)
        .into_iter()
        .map(|(id, records)| {
            let countries: BTreeSet<_> = records.iter().filter_map(|r| r.country).collect();
            let pubs: BTreeSet<&str> = records.iter().map(|r| r.publication_id.as_str()).collect();
            SuspicionVerdict {
                author_id: id.to_owned(),
                n_countries: countries.len(),
                n_publications: pubs.len(),
                suspicious: countries.len() > country_threshold || pubs.len() > pub_threshold,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisambigConfig {
    pub country_threshold: usize,
    pub pub_threshold: usize,
    pub merge_threshold: f64,
    pub linkage: Linkage,
    pub weights: ScoreTable,
}

impl Default for DisambigConfig {
    fn default() -> Self {
        DisambigConfig {
            country_threshold: 6,
            pub_threshold: 292,
            merge_threshold: 0.5,
            linkage: Linkage::Average,
            weights: ScoreTable::default(),
        }
    }
}

/// Replace author IDs of the records named in `assignments`. Every other
/// record is left as is.
pub fn reissue_ids(corpus: &Corpus, assignments: &[ClusterAssignment]) -> Result<Corpus> {
    let mut revised: HashMap<&str, &str> = HashMap::new();
    for a in assignments {
        for (rid, new_id) in &a.mapping {
            revised.insert(rid.as_str(), new_id.as_str());
        }
    }
    let mut out = corpus.clone();
    let mut used = 0;
    for r in &mut out.records {
        if let Some(new_id) = revised.get(r.record_id.as_str()) {
            r.author_id = (*new_id).to_owned();
            used += 1;
        }
    }
    if used != revised.len() {
        let known: BTreeSet<&str> = corpus
            .records
            .iter()
            .map(|r| r.record_id.as_str())
            .collect();
        let missing = revised
            .keys()
            .filter(|k| !known.contains(*k))
            .min()
            .copied()
            .unwrap_or_default();
        return Err(Error::UnknownRecord(missing.to_owned()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitSummary {
    pub author_id: String,
    pub n_records: usize,
    pub n_countries: usize,
    pub n_publications: usize,
    pub n_clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisambigReport {
    pub n_author_ids: usize,
    pub n_suspicious: usize,
    /// Distinct publications across all suspicious IDs.
    pub n_suspicious_publications: usize,
    pub n_revised_ids: usize,
    pub splits: Vec<SplitSummary>,
}

/// Flag, cluster and reissue in one pass. Suspicious IDs are independent
/// and processed in parallel; the output order does not depend on the
/// schedule.
pub fn disambiguate(corpus: &Corpus, cfg: &DisambigConfig) -> Result<(Corpus, DisambigReport)> {
    cfg.weights.check()?;
    let verdicts = flag_suspicious(corpus, cfg.country_threshold, cfg.pub_threshold);
    let suspicious: BTreeSet<&str> = verdicts
        .iter()
        .filter(|v| v.suspicious)
        .map(|v| v.author_id.as_str())
        .collect();
    let groups: Vec<_> = group_by_author(corpus)
        .into_iter()
        .filter(|(id, _)| suspicious.contains(id))
        .collect();
    let assignments: Vec<ClusterAssignment> = groups
        .par_iter()
        .map(|(id, records)| {
            let m = build_distance_matrix(records, &cfg.weights);
            cluster_records(&m, id, cfg.merge_threshold, cfg.linkage)
        })
        .collect();
    let out = reissue_ids(corpus, &assignments)?;

    let mut suspicious_pubs = BTreeSet::new();
    for (_, records) in &groups {
        suspicious_pubs.extend(records.iter().map(|r| r.publication_id.as_str()));
    }
    let by_id: HashMap<&str, &SuspicionVerdict> =
        verdicts.iter().map(|v| (v.author_id.as_str(), v)).collect();
    let splits: Vec<SplitSummary> = groups
        .iter()
        .zip(&assignments)
        .map(|((id, records), a)| SplitSummary {
            author_id: id.to_string(),
            n_records: records.len(),
            n_countries: by_id[id].n_countries,
            n_publications: by_id[id].n_publications,
            n_clusters: a.n_clusters(),
        })
        .collect();
    let report = DisambigReport {
        n_author_ids: verdicts.len(),
        n_suspicious: suspicious.len(),
        n_suspicious_publications: suspicious_pubs.len(),
        n_revised_ids: splits.iter().map(|s| s.n_clusters).sum(),
        splits,
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::country::CountryCode;
    use crate::ingest::{AuthorshipRecord, YearWindow};
    use chrono::NaiveDate;

    const COUNTRIES: [&str; 8] = ["DE", "US", "FR", "GB", "IT", "ES", "NL", "CH"];

    fn record(
        i: usize,
        author: &str,
        publication: usize,
        country: &str,
        given: &str,
    ) -> AuthorshipRecord {
        AuthorshipRecord {
            record_id: format!("r{i:05}"),
            author_id: author.into(),
            publication_id: format!("p{publication}"),
            year: 2005,
            affiliation_text: String::new(),
            country: CountryCode::new(country),
            asjc_codes: vec![],
            citation_count: 0,
            given_name: given.into(),
            surname: "Muller".into(),
            coauthor_ids: vec![],
            funding_texts: vec![],
            grant_numbers: vec![],
            country_imputed: false,
        }
    }

    fn corpus_of(records: Vec<AuthorshipRecord>) -> Corpus {
        Corpus {
            records,
            window: YearWindow::default(),
            snapshot_date: NaiveDate::from_ymd_opt(2020, 4, 1).unwrap(),
        }
    }

    fn author(n_countries: usize, n_pubs: usize) -> Corpus {
        corpus_of(
            (0..n_pubs)
                .map(|i| record(i, "a", i, COUNTRIES[i % n_countries], "Anna"))
                .collect(),
        )
    }

    #[test]
    fn seven_countries_is_suspicious() {
        let v = flag_suspicious(&author(7, 10), 6, 292);
        assert_eq!((v[0].n_countries, v[0].n_publications), (7, 10));
        assert!(v[0].suspicious);
    }

    #[test]
    fn publication_threshold_is_strict() {
        assert!(!flag_suspicious(&author(2, 292), 6, 292)[0].suspicious);
        assert!(flag_suspicious(&author(2, 293), 6, 292)[0].suspicious);
        assert!(!flag_suspicious(&author(6, 292), 6, 292)[0].suspicious);
    }

    #[test]
    fn duplicate_publications_count_once() {
        let mut c = author(1, 5);
        c.records.push(record(99, "a", 0, "DE", "Anna"));
        assert_eq!(flag_suspicious(&c, 6, 292)[0].n_publications, 5);
    }

    #[test]
    fn no_suspicious_ids_leaves_corpus_unchanged() {
        let c = author(2, 20);
        let (out, report) = disambiguate(&c, &DisambigConfig::default()).unwrap();
        assert_eq!(out, c);
        assert_eq!(report.n_suspicious, 0);
        assert_eq!(reissue_ids(&c, &[]).unwrap(), c);
    }

    #[test]
    fn split_into_three_people() {
        let names = ["Anna", "Peter", "Yuki"];
        let records: Vec<_> = (0..9)
            .map(|i| record(i, "a", i, COUNTRIES[i % 8], names[i % 3]))
            .collect();
        let c = corpus_of(records);
        let cfg = DisambigConfig {
            country_threshold: 6,
            pub_threshold: 5,
            ..DisambigConfig::default()
        };
        let (out, report) = disambiguate(&c, &cfg).unwrap();
        let ids: BTreeSet<&str> = out.records.iter().map(|r| r.author_id.as_str()).collect();
        assert_eq!(ids, BTreeSet::from(["a#1", "a#2", "a#3"]));
        assert_eq!(report.n_revised_ids, 3);
        assert_eq!(report.splits[0].n_clusters, 3);
        for r in &out.records {
            let same_name: BTreeSet<&str> = out
                .records
                .iter()
                .filter(|o| o.given_name == r.given_name)
                .map(|o| o.author_id.as_str())
                .collect();
            assert_eq!(same_name.len(), 1);
        }
        let mut before: Vec<&str> = c.records.iter().map(|r| r.record_id.as_str()).collect();
        let mut after: Vec<&str> = out.records.iter().map(|r| r.record_id.as_str()).collect();
        before.sort();
        after.sort();
        assert_eq!(before, after);
    }

    #[test]
    fn unknown_record_in_assignment() {
        let c = author(1, 3);
        let a = ClusterAssignment {
            parent_author_id: "a".into(),
            mapping: [("nope".to_owned(), "a#1".to_owned())].into(),
        };
        assert!(matches!(reissue_ids(&c, &[a]), Err(Error::UnknownRecord(id)) if id == "nope"));
    }

    #[test]
    fn matrix_matches_double_loop() {
        let mut records: Vec<_> = (0..6)
            .map(|i| {
                record(
                    i,
                    "a",
                    i,
                    "DE",
                    ["Anna", "A.", "", "Peter", "Anna", "P."][i],
                )
            })
            .collect();
        for (i, r) in records.iter_mut().enumerate() {
            r.coauthor_ids = (0..=i % 3).map(|k| format!("c{k}")).collect();
            r.asjc_codes = vec![1100 + (i as u16 % 2) * 100];
            if i % 2 == 0 {
                r.grant_numbers = vec!["G1".into()];
            }
        }
        let refs: Vec<&AuthorshipRecord> = records.iter().collect();
        let w = ScoreTable::default();
        let m = build_distance_matrix(&refs, &w);
        for i in 0..6 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..6 {
                if i != j {
                    let expected = match pairwise_similarity(&records[i], &records[j], &w) {
                        Similarity::Score(s) => 1.0 / (1.0 + s),
                        Similarity::ForcedDistinct => 1.0,
                    };
                    assert_eq!(m.get(i, j), expected, "({i},{j})");
                    assert_eq!(m.get(i, j), m.get(j, i));
                }
            }
        }
    }
}
