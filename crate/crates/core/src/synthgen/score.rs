use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::truth::GroundTruth;
use crate::country::CountryCode;
use crate::error::{Error, Result};
use crate::ingest::Corpus;
use crate::mobility::{MigrationEvent, MobilityClassification};

/// What the pipeline produced for one input corpus.
#[derive(Debug, Clone, Copy)]
pub struct PipelineOutputs<'a> {
    /// Fingerprint of the corpus the pipeline read.
    pub run_id: &'a str,
    /// Corpus after country filling and disambiguation.
    pub corpus: &'a Corpus,
    pub events: &'a [MigrationEvent],
    pub classes: &'a [MobilityClassification],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub n_true_events: usize,
    pub n_detected_events: usize,
    pub n_matched_events: usize,
    pub event_recall: f64,
    pub event_precision: f64,
    /// Planted type (rows) against assigned type (columns), one entry per
    /// person. `not_admitted` marks persons outside the focal population and
    /// `missing` persons without an output ID of their own.
    pub mobility_confusion: BTreeMap<String, BTreeMap<String, usize>>,
    pub mobility_accuracy: f64,
    pub n_masked: usize,
    pub n_restored: usize,
    pub fill_accuracy: f64,
    pub n_revised_clusters: usize,
    pub n_pure_clusters: usize,
    /// Fraction of revised-ID clusters whose records all belong to one person.
    pub cluster_purity: f64,
    /// Fraction of records in revised-ID clusters that belong to their
    /// cluster's majority person.
    pub record_purity: f64,
    pub n_collisions: usize,
    pub n_collisions_separated: usize,
    pub collision_separation: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

const NOT_ADMITTED: &str = "not_admitted";
const MISSING: &str = "missing";

/// Compare pipeline outputs against the planted truth.
pub fn score_pipeline(truth: &GroundTruth, out: PipelineOutputs<'_>) -> Result<ScoreCard> {
    if truth.run_id != out.run_id {
        return Err(Error::RunMismatch {
            truth: truth.run_id.clone(),
            outputs: out.run_id.to_owned(),
        });
    }

    // Records per (output id, person).
    let mut members: BTreeMap<&str, BTreeMap<usize, usize>> = BTreeMap::new();
    for r in &out.corpus.records {
        let person = *truth
            .record_person
            .get(&r.record_id)
            .ok_or_else(|| Error::UnknownRecord(r.record_id.clone()))?;
        *members
            .entry(&r.author_id)
            .or_default()
            .entry(person)
            .or_default() += 1;
    }
    let majority = |counts: &BTreeMap<usize, usize>| {
        counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(p, n)| (*p, *n))
            .unwrap()
    };
    let owner: HashMap<&str, usize> = members.iter().map(|(id, c)| (*id, majority(c).0)).collect();

    type Key = (usize, i32, CountryCode, CountryCode);
    let mut truth_events: BTreeMap<Key, usize> = BTreeMap::new();
    for p in &truth.persons {
        for e in &p.events {
            *truth_events
                .entry((p.person, e.year, e.origin, e.destination))
                .or_default() += 1;
        }
    }
    let mut detected: BTreeMap<Key, usize> = BTreeMap::new();
    for e in out.events {
        let Some(&p) = owner.get(e.researcher_id.as_str()) else {
            return Err(Error::UnknownRecord(format!(
                "researcher {}",
                e.researcher_id
            )));
        };
        *detected
            .entry((p, e.year, e.origin, e.destination))
            .or_default() += 1;
    }
    let matched: usize = detected
        .iter()
        .map(|(k, n)| (*n).min(truth_events.get(k).copied().unwrap_or(0)))
        .sum();
    let n_true_events = truth_events.values().sum();
    let n_detected_events = out.events.len();

    // Each person is represented by the output ID holding most of its
    // records among the IDs it is the majority of.
    let mut primary: BTreeMap<usize, (usize, &str)> = BTreeMap::new();
    for (id, counts) in &members {
        let (p, n) = majority(counts);
        let better = match primary.get(&p) {
            None => true,
            Some((best, best_id)) => n > *best || (n == *best && *id < *best_id),
        };
        if better {
            primary.insert(p, (n, id));
        }
    }
    let classes: HashMap<&str, &MobilityClassification> = out
        .classes
        .iter()
        .map(|c| (c.researcher_id.as_str(), c))
        .collect();
    let mut confusion: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut agree = 0;
    for p in &truth.persons {
        let planted = p.mobility_type.map_or(NOT_ADMITTED, |t| t.as_str());
        let assigned = match primary.get(&p.person) {
            None => MISSING,
            Some((_, id)) => classes
                .get(id)
                .map_or(NOT_ADMITTED, |c| c.mobility_type.as_str()),
        };
        agree += usize::from(planted == assigned);
        *confusion
            .entry(planted.to_owned())
            .or_default()
            .entry(assigned.to_owned())
            .or_default() += 1;
    }

    let filled: HashMap<&str, Option<CountryCode>> = out
        .corpus
        .records
        .iter()
        .map(|r| (r.record_id.as_str(), r.country))
        .collect();
    let n_restored = truth
        .masked
        .iter()
        .filter(|(id, c)| filled.get(id.as_str()).copied().flatten() == Some(**c))
        .count();

    let original: BTreeSet<&str> = truth.persons.iter().map(|p| p.author_id.as_str()).collect();
    let mut n_revised = 0;
    let mut n_pure = 0;
    let mut revised_records = 0;
    let mut majority_records = 0;
    for (id, counts) in &members {
        if original.contains(id) {
            continue;
        }
        n_revised += 1;
        n_pure += usize::from(counts.len() == 1);
        revised_records += counts.values().sum::<usize>();
        majority_records += majority(counts).1;
    }

    let separated = truth
        .collisions
        .iter()
        .filter(|c| {
            members
                .values()
                .all(|counts| c.persons.iter().filter(|p| counts.contains_key(p)).count() <= 1)
        })
        .count();

    Ok(ScoreCard {
        n_true_events,
        n_detected_events,
        n_matched_events: matched,
        event_recall: ratio(matched, n_true_events),
        event_precision: ratio(matched, n_detected_events),
        mobility_confusion: confusion,
        mobility_accuracy: ratio(agree, truth.persons.len()),
        n_masked: truth.masked.len(),
        n_restored,
        fill_accuracy: ratio(n_restored, truth.masked.len()),
        n_revised_clusters: n_revised,
        n_pure_clusters: n_pure,
        cluster_purity: ratio(n_pure, n_revised),
        record_purity: ratio(majority_records, revised_records),
        n_collisions: truth.collisions.len(),
        n_collisions_separated: separated,
        collision_separation: ratio(separated, truth.collisions.len()),
    })
}
