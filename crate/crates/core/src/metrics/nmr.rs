//! Research-active population and net migration rates.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::country::CountryCode;
use crate::error::{Error, Result};
use crate::ingest::{Corpus, YearWindow};
use crate::mobility::MigrationEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NmrConfig {
    /// Leading corpus years left out of the reported series.
    pub head_trim: i32,
    /// Trailing corpus years left out of the reported series.
    pub tail_trim: i32,
    /// Half-width of the year window used for the research-active count.
    pub vicinity: i32,
}

impl Default for NmrConfig {
    fn default() -> Self {
        NmrConfig {
            head_trim: 2,
            tail_trim: 3,
            vicinity: 2,
        }
    }
}

/// Distinct researchers with at least one `focal` record dated within
/// `year ± vicinity`. Scans the whole corpus.
pub fn research_active_population(
    corpus: &Corpus,
    focal: CountryCode,
    year: i32,
    vicinity: i32,
) -> usize {
    corpus
        .records
        .iter()
        .filter(|r| r.country == Some(focal) && (r.year - year).abs() <= vicinity)
        .map(|r| r.author_id.as_str())
        .collect::<BTreeSet<_>>()
        .len()
}

fn in_out(events: &[MigrationEvent], focal: CountryCode, year: i32) -> (u64, u64) {
    let mut inflow = 0;
    let mut outflow = 0;
    for e in events.iter().filter(|e| e.year == year) {
        if e.destination == focal {
            inflow += 1;
        } else if e.origin == focal {
            outflow += 1;
        }
    }
    (inflow, outflow)
}

fn rate(inflow: u64, outflow: u64, population: usize) -> Option<f64> {
    (population > 0).then(|| (inflow as f64 - outflow as f64) / population as f64 * 1000.0)
}

/// Per-thousand net migration rate for one year, `None` when nobody is
/// research-active.
pub fn net_migration_rate(
    events: &[MigrationEvent],
    corpus: &Corpus,
    focal: CountryCode,
    year: i32,
    vicinity: i32,
) -> Option<f64> {
    let (inflow, outflow) = in_out(events, focal, year);
    rate(
        inflow,
        outflow,
        research_active_population(corpus, focal, year, vicinity),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NmrRow {
    pub year: i32,
    pub inflow: u64,
    pub outflow: u64,
    pub population: usize,
    pub nmr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NmrSeries {
    pub rows: Vec<NmrRow>,
    pub reported_window: YearWindow,
}

impl NmrSeries {
    pub fn get(&self, year: i32) -> Option<&NmrRow> {
        self.rows.iter().find(|r| r.year == year)
    }
}

/// Years reported after trimming the corpus window.
pub fn reported_window(window: YearWindow, cfg: &NmrConfig) -> Result<YearWindow> {
    if cfg.head_trim < 0 || cfg.tail_trim < 0 || window.len() <= cfg.head_trim + cfg.tail_trim {
        return Err(Error::WindowTooShort {
            start: window.start_year,
            end: window.end_year,
            head: cfg.head_trim,
            tail: cfg.tail_trim,
        });
    }
    Ok(YearWindow::new(
        window.start_year + cfg.head_trim,
        window.end_year - cfg.tail_trim,
    ))
}

/// Research-active counts for every year of `years`, from one pass that
/// collects each researcher's focal publishing years.
pub fn population_by_year(
    corpus: &Corpus,
    focal: CountryCode,
    years: YearWindow,
    vicinity: i32,
) -> Vec<usize> {
    let mut focal_years: HashMap<&str, BTreeSet<i32>> = HashMap::new();
    for r in corpus.records.iter().filter(|r| r.country == Some(focal)) {
        focal_years
            .entry(r.author_id.as_str())
            .or_default()
            .insert(r.year);
    }
    let n = years.len() as usize;
    let mut counts = vec![0usize; n];
    for ys in focal_years.values() {
        let mut covered = vec![false; n];
        for &y in ys {
            let lo = (y - vicinity).max(years.start_year);
            let hi = (y + vicinity).min(years.end_year);
            for q in lo..=hi {
                covered[(q - years.start_year) as usize] = true;
            }
        }
        for (c, hit) in counts.iter_mut().zip(covered) {
            *c += hit as usize;
        }
    }
    counts
}

pub fn nmr_series(
    events: &[MigrationEvent],
    corpus: &Corpus,
    focal: CountryCode,
    cfg: &NmrConfig,
) -> Result<NmrSeries> {
    let reported = reported_window(corpus.window, cfg)?;
    let population = population_by_year(corpus, focal, reported, cfg.vicinity);
    let mut flows: HashMap<i32, (u64, u64)> = HashMap::new();
    for e in events {
        if e.destination == focal {
            flows.entry(e.year).or_default().0 += 1;
        } else if e.origin == focal {
            flows.entry(e.year).or_default().1 += 1;
        }
    }
    let rows = reported
        .years()
        .zip(population)
        .map(|(year, population)| {
            let (inflow, outflow) = flows.get(&year).copied().unwrap_or_default();
            NmrRow {
                year,
                inflow,
                outflow,
                population,
                nmr: rate(inflow, outflow, population),
            }
        })
        .collect();
    Ok(NmrSeries {
        rows,
        reported_window: reported,
    })
}
