//! Plot-ready report tables and their CSV files.
//!
//! Every file starts with a `# run_manifest_sha256=<hash>` comment line,
//! followed by a header row. Rows are sorted by a stable key.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::country::CountryCode;
use crate::error::{Error, Result};
use crate::metrics::{quantile_linear, CitationGroup, CitationProfile, FlowMatrix, NmrSeries};
use crate::mobility::{MobilityClassification, MobilityType};
use crate::taxonomy_gender::{
    gender_ratio_by_discipline, DisciplineAssignment, GenderRatio, GenderRecord, Subset,
};

/// Rendering of an undefined ratio.
pub const UNDEFINED: &str = "\u{2014}";

pub const MOBILITY_TABLE: &str = "mobility_table.csv";
pub const CITATION_STATS: &str = "citation_stats.csv";
pub const FLOWS_IN: &str = "flows_in.csv";
pub const FLOWS_OUT: &str = "flows_out.csv";
pub const NMR: &str = "nmr.csv";
pub const CORRIDORS: &str = "citation_groups_by_corridor.csv";
pub const GENDER_RATIOS: &str = "gender_ratios.csv";
pub const CITATION_PROFILES: &str = "citation_profiles.csv";

pub const REPORT_FILES: [&str; 8] = [
    MOBILITY_TABLE,
    CITATION_STATS,
    FLOWS_IN,
    FLOWS_OUT,
    NMR,
    CORRIDORS,
    GENDER_RATIOS,
    CITATION_PROFILES,
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MobilityRow {
    pub mobility_type: MobilityType,
    pub count: usize,
    pub percent: f64,
}

/// Count and share of each mobility type; empty when nobody is classified.
pub fn mobility_table(classes: &[MobilityClassification]) -> Vec<MobilityRow> {
    if classes.is_empty() {
        return Vec::new();
    }
    let mut counts: BTreeMap<MobilityType, usize> = BTreeMap::new();
    for c in classes {
        *counts.entry(c.mobility_type).or_default() += 1;
    }
    MobilityType::ALL
        .iter()
        .map(|t| {
            let count = counts.get(t).copied().unwrap_or(0);
            MobilityRow {
                mobility_type: *t,
                count,
                percent: 100.0 * count as f64 / classes.len() as f64,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CitationStatRow {
    pub discipline: String,
    pub mobility_type: MobilityType,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
}

/// Annual citation rate summaries per (discipline, mobility type).
pub fn citation_stats(profiles: &[CitationProfile]) -> Vec<CitationStatRow> {
    let mut cells: BTreeMap<(&str, MobilityType), Vec<f64>> = BTreeMap::new();
    for p in profiles {
        cells
            .entry((&p.discipline, p.mobility_type))
            .or_default()
            .push(p.annual_rate);
    }
    cells
        .into_iter()
        .map(|((d, t), mut v)| {
            v.sort_by(f64::total_cmp);
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            CitationStatRow {
                discipline: d.to_owned(),
                mobility_type: t,
                n: v.len(),
                mean,
                median: quantile_linear(&v, 0.5),
                std: var.sqrt(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Immigrants, keyed by academic origin.
    In,
    /// Emigrants, keyed by academic destination.
    Out,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorridorRow {
    pub country: CountryCode,
    pub direction: Direction,
    pub citation_group: CitationGroup,
    pub count: usize,
    /// Share of the (country, direction) total.
    pub share: f64,
}

/// Citation group composition of immigrants by origin and emigrants by
/// destination. Each (country, direction) pair gets all three groups.
pub fn corridor_composition(
    classes: &[MobilityClassification],
    profiles: &[CitationProfile],
) -> Vec<CorridorRow> {
    let groups: HashMap<&str, CitationGroup> = profiles
        .iter()
        .filter_map(|p| p.citation_group.map(|g| (p.researcher_id.as_str(), g)))
        .collect();
    let mut counts: BTreeMap<(Direction, CountryCode), [usize; 3]> = BTreeMap::new();
    for c in classes {
        let key = match c.mobility_type {
            MobilityType::Immigrant => c.academic_origin.map(|o| (Direction::In, o)),
            MobilityType::Emigrant => c.academic_destination.map(|d| (Direction::Out, d)),
            _ => None,
        };
        let (Some(key), Some(g)) = (key, groups.get(c.researcher_id.as_str())) else {
            continue;
        };
        counts.entry(key).or_default()[*g as usize] += 1;
    }
    let mut rows = Vec::new();
    for ((direction, country), cells) in counts {
        let total: usize = cells.iter().sum();
        for (g, count) in CitationGroup::ALL.iter().zip(cells) {
            rows.push(CorridorRow {
                country,
                direction,
                citation_group: *g,
                count,
                share: count as f64 / total as f64,
            });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenderRatioRow {
    pub discipline: String,
    pub all: GenderRatio,
    pub migrants: GenderRatio,
}

/// Ratios for all classified researchers and for migrants side by side.
pub fn gender_ratio_table(
    classes: &[MobilityClassification],
    assignments: &[DisciplineAssignment],
    genders: &[GenderRecord],
) -> Vec<GenderRatioRow> {
    let all = gender_ratio_by_discipline(classes, assignments, genders, Subset::All);
    let migrants = gender_ratio_by_discipline(classes, assignments, genders, Subset::Migrants);
    all.into_iter()
        .map(|(d, a)| {
            let m = migrants.get(&d).copied().unwrap_or_default();
            GenderRatioRow {
                discipline: d,
                all: a,
                migrants: m,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub manifest_hash: String,
    pub mobility_table: Vec<MobilityRow>,
    pub citation_stats: Vec<CitationStatRow>,
    pub flows_in: FlowMatrix,
    pub flows_out: FlowMatrix,
    pub nmr: NmrSeries,
    pub corridors: Vec<CorridorRow>,
    pub gender_ratios: Vec<GenderRatioRow>,
    pub citation_profiles: Vec<CitationProfile>,
}

fn ratio_cell(r: Option<f64>) -> String {
    r.map_or_else(|| UNDEFINED.to_owned(), |v| v.to_string())
}

fn opt_cell<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Write one report CSV: the manifest comment line, `header`, then `rows`.
pub fn write_table(path: &Path, hash: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# run_manifest_sha256={hash}").map_err(|e| Error::io(path, e))?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_flows(path: &Path, hash: &str, m: &FlowMatrix) -> Result<()> {
    let rows: Vec<Vec<String>> = m
        .ranked()
        .into_iter()
        .map(|((o, d), n)| vec![o.to_string(), d.to_string(), n.to_string()])
        .collect();
    write_table(path, hash, &["origin", "destination", "count"], &rows)
}

/// Years with an undefined rate (no research-active population) are left out.
pub fn write_nmr(path: &Path, hash: &str, s: &NmrSeries) -> Result<()> {
    let rows: Vec<Vec<String>> = s
        .rows
        .iter()
        .filter_map(|r| {
            r.nmr.map(|v| {
                vec![
                    r.year.to_string(),
                    r.inflow.to_string(),
                    r.outflow.to_string(),
                    r.population.to_string(),
                    v.to_string(),
                ]
            })
        })
        .collect();
    write_table(
        path,
        hash,
        &[
            "year",
            "inflow",
            "outflow",
            "population",
            "nmr_per_thousand",
        ],
        &rows,
    )
}

pub fn write_citation_profiles(
    path: &Path,
    hash: &str,
    profiles: &[CitationProfile],
) -> Result<()> {
    let rows: Vec<Vec<String>> = profiles
        .iter()
        .map(|p| {
            vec![
                p.researcher_id.clone(),
                p.mobility_type.to_string(),
                p.discipline.clone(),
                p.total_citations.to_string(),
                p.academic_age.to_string(),
                p.annual_rate.to_string(),
                opt_cell(p.discipline_normalized),
                opt_cell(p.citation_group.map(|g| g.as_str())),
            ]
        })
        .collect();
    write_table(
        path,
        hash,
        &[
            "researcher_id",
            "mobility_type",
            "discipline",
            "total_citations",
            "academic_age",
            "annual_rate",
            "discipline_normalized",
            "citation_group",
        ],
        &rows,
    )
}

pub fn write_corridors(path: &Path, hash: &str, rows: &[CorridorRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.country.to_string(),
                r.direction.as_str().to_owned(),
                r.citation_group.as_str().to_owned(),
                r.count.to_string(),
                r.share.to_string(),
            ]
        })
        .collect();
    write_table(
        path,
        hash,
        &["country", "direction", "citation_group", "count", "share"],
        &rows,
    )
}

pub fn write_mobility_table(path: &Path, hash: &str, rows: &[MobilityRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.mobility_type.to_string(),
                r.count.to_string(),
                format!("{:.2}", r.percent),
            ]
        })
        .collect();
    write_table(path, hash, &["mobility_type", "count", "percent"], &rows)
}

pub fn write_citation_stats(path: &Path, hash: &str, rows: &[CitationStatRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.discipline.clone(),
                r.mobility_type.to_string(),
                r.n.to_string(),
                r.mean.to_string(),
                r.median.to_string(),
                r.std.to_string(),
            ]
        })
        .collect();
    write_table(
        path,
        hash,
        &["discipline", "mobility_type", "n", "mean", "median", "std"],
        &rows,
    )
}

pub fn write_gender_ratios(path: &Path, hash: &str, rows: &[GenderRatioRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.discipline.clone(),
                r.all.male.to_string(),
                r.all.female.to_string(),
                ratio_cell(r.all.ratio),
                r.migrants.male.to_string(),
                r.migrants.female.to_string(),
                ratio_cell(r.migrants.ratio),
            ]
        })
        .collect();
    write_table(
        path,
        hash,
        &[
            "discipline",
            "all_male",
            "all_female",
            "all_ratio",
            "migrants_male",
            "migrants_female",
            "migrants_ratio",
        ],
        &rows,
    )
}

/// Write the eight report tables into `dir`.
pub fn emit_reports(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let h = bundle.manifest_hash.as_str();
    let p = |name: &str| dir.join(name);
    write_mobility_table(&p(MOBILITY_TABLE), h, &bundle.mobility_table)?;
    write_citation_stats(&p(CITATION_STATS), h, &bundle.citation_stats)?;
    write_flows(&p(FLOWS_IN), h, &bundle.flows_in)?;
    write_flows(&p(FLOWS_OUT), h, &bundle.flows_out)?;
    write_nmr(&p(NMR), h, &bundle.nmr)?;
    write_corridors(&p(CORRIDORS), h, &bundle.corridors)?;
    write_gender_ratios(&p(GENDER_RATIOS), h, &bundle.gender_ratios)?;
    write_citation_profiles(&p(CITATION_PROFILES), h, &bundle.citation_profiles)?;
    Ok(REPORT_FILES.iter().map(|f| p(f)).collect())
}

/// Read a report CSV back: the manifest hash, the header and the rows.
pub fn read_table(path: &Path) -> Result<(String, Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let hash = first
        .strip_prefix("# run_manifest_sha256=")
        .ok_or_else(|| Error::BadHeader(format!("{}: missing manifest line", path.display())))?
        .to_owned();
    let mut rdr = csv::Reader::from_reader(rest.as_bytes());
    let header = rdr.headers()?.iter().map(str::to_owned).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_owned).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((hash, header, rows))
}
