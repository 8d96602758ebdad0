//! Distance matrices and threshold-cut agglomerative clustering.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::score::{similarity_of, Features, ScoreTable};
use crate::ingest::AuthorshipRecord;

/// Symmetric distances between the records of one author ID, stored as the
/// strict upper triangle. The diagonal is implicitly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub record_ids: Vec<String>,
    upper: Vec<f64>,
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl SimilarityMatrix {
    /// Build from a full square matrix; only the upper triangle is read.
    pub fn from_square(record_ids: Vec<String>, square: &[Vec<f64>]) -> Self {
        let n = record_ids.len();
        assert_eq!(square.len(), n, "matrix size must match record count");
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for (i, row) in square.iter().enumerate() {
            upper.extend_from_slice(&row[i + 1..]);
        }
        SimilarityMatrix { record_ids, upper }
    }

    pub fn len(&self) -> usize {
        self.record_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.record_ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.upper[tri_index(self.len(), i, j)],
            std::cmp::Ordering::Greater => self.upper[tri_index(self.len(), j, i)],
        }
    }
}

/// Distances `1 / (1 + score)` for every record pair; forced-distinct pairs
/// get 1.0.
pub fn build_distance_matrix(
    records: &[&AuthorshipRecord],
    weights: &ScoreTable,
) -> SimilarityMatrix {
    let features: Vec<Features> = records.iter().map(|r| Features::of(r)).collect();
    let n = records.len();
    let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            upper.push(similarity_of(&features[i], &features[j], weights).distance());
        }
    }
    SimilarityMatrix {
        record_ids: records.iter().map(|r| r.record_id.clone()).collect(),
        upper,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
}

impl FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(format!("unknown linkage {other:?}")),
        }
    }
}

impl Linkage {
    /// Lance-Williams update: distance from cluster `k` to the union of
    /// `i` (size `ni`) and `j` (size `nj`).
    fn update(self, dki: f64, dkj: f64, ni: usize, nj: usize) -> f64 {
        match self {
            Linkage::Single => dki.min(dkj),
            Linkage::Complete => dki.max(dkj),
            Linkage::Average => (ni as f64 * dki + nj as f64 * dkj) / (ni + nj) as f64,
        }
    }
}

/// One merge step: slots `into` and `from` (`into < from`) joined at
/// linkage distance `distance` while holding `sizes` records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub into: usize,
    pub from: usize,
    pub distance: f64,
    pub sizes: (usize, usize),
}

/// For each matrix row, the slot of the cluster it ends up in.
pub fn agglomerate(m: &SimilarityMatrix, threshold: f64, linkage: Linkage) -> Vec<usize> {
    agglomerate_with_merges(m, threshold, linkage).0
}

/// Starting from singletons, the closest pair of clusters is merged while
/// its linkage distance is at most `threshold`. Equal distances go to the
/// lexicographically smallest `(i, j)` pair of cluster slots, where a merged
/// cluster keeps the smaller slot.
pub fn agglomerate_with_merges(
    m: &SimilarityMatrix,
    threshold: f64,
    linkage: Linkage,
) -> (Vec<usize>, Vec<Merge>) {
    let n = m.len();
    let mut dist = m.upper.clone();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut parent: Vec<usize> = (0..n).collect();
    // nearest[i] = (distance, j) over active j > i.
    let mut nearest: Vec<Option<(f64, usize)>> = vec![None; n];
    let mut merges = Vec::new();

    let d = |dist: &[f64], i: usize, j: usize| -> f64 {
        if i < j {
            dist[tri_index(n, i, j)]
        } else {
            dist[tri_index(n, j, i)]
        }
    };
    let scan = |dist: &[f64], active: &[bool], i: usize| -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for j in i + 1..n {
            if active[j] {
                let v = dist[tri_index(n, i, j)];
                if best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, j));
                }
            }
        }
        best
    };

    for i in 0..n {
        nearest[i] = scan(&dist, &active, i);
    }

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            if let Some((v, j)) = nearest[i] {
                if best.is_none_or(|(b, _, _)| v < b) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((v, i, j)) = best else { break };
        if v > threshold {
            break;
        }
        merges.push(Merge {
            into: i,
            from: j,
            distance: v,
            sizes: (size[i], size[j]),
        });

        for k in 0..n {
            if active[k] && k != i && k != j {
                let updated = linkage.update(d(&dist, k, i), d(&dist, k, j), size[i], size[j]);
                let idx = if k < i {
                    tri_index(n, k, i)
                } else {
                    tri_index(n, i, k)
                };
                dist[idx] = updated;
            }
        }
        active[j] = false;
        size[i] += size[j];
        parent[j] = i;

        for k in 0..n {
            if !active[k] {
                continue;
            }
            if k == i {
                nearest[k] = scan(&dist, &active, k);
            } else if k < i {
                match nearest[k] {
                    Some((_, nk)) if nk == i || nk == j => nearest[k] = scan(&dist, &active, k),
                    Some((bv, nk)) => {
                        let dk = dist[tri_index(n, k, i)];
                        if dk < bv || (dk == bv && i < nk) {
                            nearest[k] = Some((dk, i));
                        }
                    }
                    None => nearest[k] = scan(&dist, &active, k),
                }
            } else if let Some((_, nk)) = nearest[k] {
                if nk == j {
                    nearest[k] = scan(&dist, &active, k);
                }
            }
        }
    }

    let find = |mut x: usize| {
        while parent[x] != x {
            x = parent[x];
        }
        x
    };
    ((0..n).map(find).collect(), merges)
}

/// Revised author IDs for the records of one parent ID.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub parent_author_id: String,
    /// record_id to revised author id.
    pub mapping: BTreeMap<String, String>,
}

impl ClusterAssignment {
    pub fn n_clusters(&self) -> usize {
        let mut ids: Vec<&String> = self.mapping.values().collect();
        ids.sort();
        ids.dedup();
        ids.len()
    }
}

/// Cluster a matrix and name the clusters `parent#1`, `parent#2`, ... in
/// ascending order of each cluster's smallest record id.
pub fn cluster_records(
    m: &SimilarityMatrix,
    parent_author_id: &str,
    merge_threshold: f64,
    linkage: Linkage,
) -> ClusterAssignment {
    let labels = agglomerate(m, merge_threshold, linkage);
    let mut smallest: BTreeMap<usize, &str> = BTreeMap::new();
    for (row, &label) in labels.iter().enumerate() {
        let id = m.record_ids[row].as_str();
        smallest
            .entry(label)
            .and_modify(|s| {
                if id < *s {
                    *s = id;
                }
            })
            .or_insert(id);
    }
    let mut order: Vec<(&str, usize)> = smallest.into_iter().map(|(l, s)| (s, l)).collect();
    order.sort();
    let ordinal: BTreeMap<usize, usize> = order
        .iter()
        .enumerate()
        .map(|(k, &(_, label))| (label, k + 1))
        .collect();
    let mapping = labels
        .iter()
        .enumerate()
        .map(|(row, label)| {
            (
                m.record_ids[row].clone(),
                format!("{parent_author_id}#{}", ordinal[label]),
            )
        })
        .collect();
    ClusterAssignment {
        parent_author_id: parent_author_id.to_owned(),
        mapping,
    }
}
