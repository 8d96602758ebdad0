//! Discipline assignment by Z-test over ASJC code frequencies, and gender
//! ratios by discipline.

pub mod asjc;
pub mod gender;

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{AuthorshipRecord, Corpus};
use crate::mobility::{group_by_author, MobilityClassification};
pub use asjc::{
    discipline_index, DisciplineLabel, Field, FieldLabel, Label, DISCIPLINES, MULTIDISCIPLINARY,
};
pub use gender::{
    infer_gender, infer_researcher_gender, researcher_name_key, Gender, GenderGates, GenderRecord,
    GenderSource, NameEntry, NameGenderTable,
};

pub const N_DISCIPLINES: usize = 26;
pub const N_FIELDS: usize = 4;

/// Share of a researcher's ASJC code occurrences per discipline and field.
#[derive(Debug, Clone, PartialEq)]
pub struct Frequencies {
    pub disciplines: [f64; N_DISCIPLINES],
    pub fields: [f64; N_FIELDS],
    /// Code occurrences that mapped into the table.
    pub n_codes: usize,
    /// Code occurrences outside the table.
    pub ignored: usize,
}

impl Frequencies {
    /// Non-zero discipline shares keyed by name.
    pub fn discipline_map(&self) -> BTreeMap<&'static str, f64> {
        DISCIPLINES
            .iter()
            .zip(self.disciplines)
            .filter(|(_, f)| *f > 0.0)
            .map(|(d, f)| (d.name, f))
            .collect()
    }
}

/// Flat count of every code occurrence on every record. `None` when no code
/// maps into the taxonomy, which makes the researcher unclassifiable.
pub fn field_frequencies<'a, I>(records: I) -> Option<Frequencies>
where
    I: IntoIterator<Item = &'a AuthorshipRecord>,
{
    let mut counts = [0usize; N_DISCIPLINES];
    let mut ignored = 0;
    for r in records {
        for &code in &r.asjc_codes {
            match discipline_index(code) {
                Some(i) => counts[i] += 1,
                None => ignored += 1,
            }
        }
    }
    let n_codes: usize = counts.iter().sum();
    if n_codes == 0 {
        return None;
    }
    let total = n_codes as f64;
    let mut disciplines = [0.0; N_DISCIPLINES];
    let mut field_counts = [0usize; N_FIELDS];
    for (i, &c) in counts.iter().enumerate() {
        disciplines[i] = c as f64 / total;
        field_counts[DISCIPLINES[i].field.index()] += c;
    }
    let fields = field_counts.map(|c| c as f64 / total);
    Some(Frequencies {
        disciplines,
        fields,
        n_codes,
        ignored,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Population standard deviation (divide by N).
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationStats {
    pub disciplines: Vec<Moments>,
    pub fields: Vec<Moments>,
    /// Researchers contributing (those with at least one mapped code).
    pub n: usize,
}

impl PopulationStats {
    /// Names of disciplines with zero spread; they never receive a z-score.
    pub fn degenerate_disciplines(&self) -> Vec<&'static str> {
        self.disciplines
            .iter()
            .zip(DISCIPLINES.iter())
            .filter(|(m, _)| !(m.std > 0.0))
            .map(|(_, d)| d.name)
            .collect()
    }
}

fn moments(values: impl Iterator<Item = f64> + Clone) -> Moments {
    let n = values.clone().count();
    if n == 0 {
        return Moments::default();
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    Moments {
        mean,
        std: var.sqrt(),
    }
}

pub fn population_stats(freqs: &[Frequencies]) -> PopulationStats {
    PopulationStats {
        disciplines: (0..N_DISCIPLINES)
            .map(|d| moments(freqs.iter().map(move |f| f.disciplines[d])))
            .collect(),
        fields: (0..N_FIELDS)
            .map(|k| moments(freqs.iter().map(move |f| f.fields[k])))
            .collect(),
        n: freqs.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisciplineAssignment {
    pub researcher_id: String,
    #[serde(serialize_with = "ser_label_field")]
    pub field: FieldLabel,
    #[serde(serialize_with = "ser_label_discipline")]
    pub discipline: DisciplineLabel,
    /// Per-discipline z-scores; `None` where the population spread is zero
    /// or the researcher is unclassifiable.
    pub discipline_z: Vec<Option<f64>>,
    pub field_z: Vec<Option<f64>>,
}

fn ser_label_field<S: serde::Serializer>(
    l: &FieldLabel,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(l.name())
}

fn ser_label_discipline<S: serde::Serializer>(
    l: &DisciplineLabel,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(l.name())
}

impl DisciplineAssignment {
    pub fn z_scores(&self) -> BTreeMap<&'static str, f64> {
        DISCIPLINES
            .iter()
            .zip(&self.discipline_z)
            .filter_map(|(d, z)| z.map(|z| (d.name, z)))
            .collect()
    }
}

/// Index of the largest score, first in order on ties, if it exceeds
/// `threshold`.
pub fn argmax_above(scores: &[Option<f64>], threshold: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, z) in scores.iter().enumerate() {
        if let Some(z) = *z {
            if best.is_none_or(|(_, b)| z > b) {
                best = Some((i, z));
            }
        }
    }
    best.filter(|&(_, z)| z > threshold).map(|(i, _)| i)
}

fn z_scores(values: &[f64], stats: &[Moments]) -> Vec<Option<f64>> {
    values
        .iter()
        .zip(stats)
        .map(|(&f, m)| (m.std > 0.0).then(|| (f - m.mean) / m.std))
        .collect()
}

/// Z-test assignment at discipline and field level. A researcher without
/// frequencies is Multidisciplinary at both levels.
pub fn assign_discipline(
    researcher_id: &str,
    freqs: Option<&Frequencies>,
    stats: &PopulationStats,
    threshold: f64,
) -> DisciplineAssignment {
    let Some(freqs) = freqs else {
        return DisciplineAssignment {
            researcher_id: researcher_id.to_owned(),
            field: Label::Multidisciplinary,
            discipline: Label::Multidisciplinary,
            discipline_z: vec![None; N_DISCIPLINES],
            field_z: vec![None; N_FIELDS],
        };
    };
    let discipline_z = z_scores(&freqs.disciplines, &stats.disciplines);
    let field_z = z_scores(&freqs.fields, &stats.fields);
    let discipline =
        argmax_above(&discipline_z, threshold).map_or(Label::Multidisciplinary, Label::Assigned);
    let field = argmax_above(&field_z, threshold)
        .map_or(Label::Multidisciplinary, |k| Label::Assigned(Field::ALL[k]));
    DisciplineAssignment {
        researcher_id: researcher_id.to_owned(),
        field,
        discipline,
        discipline_z,
        field_z,
    }
}

/// Assign every researcher of the corpus. Population statistics exclude
/// researchers without mapped codes.
pub fn assign_corpus(
    corpus: &Corpus,
    threshold: f64,
) -> (Vec<DisciplineAssignment>, PopulationStats) {
    let groups = group_by_author(corpus);
    let freqs: Vec<Option<Frequencies>> = groups
        .par_iter()
        .map(|(_, rs)| field_frequencies(rs.iter().copied()))
        .collect();
    let present: Vec<Frequencies> = freqs.iter().flatten().cloned().collect();
    let stats = population_stats(&present);
    let assignments = groups
        .par_iter()
        .zip(freqs.par_iter())
        .map(|((id, _), f)| assign_discipline(id, f.as_ref(), &stats, threshold))
        .collect();
    (assignments, stats)
}

pub fn genders_for_corpus(
    corpus: &Corpus,
    table: &NameGenderTable,
    gates: GenderGates,
) -> Vec<GenderRecord> {
    group_by_author(corpus)
        .par_iter()
        .map(|(id, rs)| infer_researcher_gender(id, rs.iter().copied(), table, gates))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    All,
    Migrants,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GenderRatio {
    pub male: usize,
    pub female: usize,
    /// `None` when there are no women: the ratio is undefined, never infinite.
    pub ratio: Option<f64>,
}

/// Male-to-female ratio per discipline among classified researchers.
/// Unknown genders are excluded identically for both subsets.
pub fn gender_ratio_by_discipline(
    classes: &[MobilityClassification],
    assignments: &[DisciplineAssignment],
    genders: &[GenderRecord],
    subset: Subset,
) -> BTreeMap<String, GenderRatio> {
    let discipline: HashMap<&str, DisciplineLabel> = assignments
        .iter()
        .map(|a| (a.researcher_id.as_str(), a.discipline))
        .collect();
    let gender: HashMap<&str, Gender> = genders
        .iter()
        .map(|g| (g.researcher_id.as_str(), g.gender))
        .collect();
    let mut out: BTreeMap<String, GenderRatio> = BTreeMap::new();
    for c in classes {
        if subset == Subset::Migrants && !c.mobility_type.is_migrant() {
            continue;
        }
        let id = c.researcher_id.as_str();
        let (Some(d), Some(g)) = (discipline.get(id), gender.get(id)) else {
            continue;
        };
        let cell = out.entry(d.name().to_owned()).or_default();
        match g {
            Gender::Male => cell.male += 1,
            Gender::Female => cell.female += 1,
            Gender::Unknown => {}
        }
    }
    for cell in out.values_mut() {
        cell.ratio = (cell.female > 0).then(|| cell.male as f64 / cell.female as f64);
    }
    out
}

pub const ASSIGNMENTS_COLUMNS: [&str; 3] = ["researcher_id", "field", "discipline"];
pub const GENDERS_COLUMNS: [&str; 3] = ["researcher_id", "gender", "source"];

pub fn write_assignments_csv<W: Write>(rows: &[DisciplineAssignment], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(ASSIGNMENTS_COLUMNS)?;
    for a in rows {
        w.write_record([
            a.researcher_id.as_str(),
            a.field.name(),
            a.discipline.name(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<assignments>", e))
}

/// Researcher to (field, discipline) labels. Z-scores are not part of the
/// file layout.
pub fn read_assignments_csv<R: Read>(r: R) -> Result<Vec<(String, FieldLabel, DisciplineLabel)>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != ASSIGNMENTS_COLUMNS {
        return Err(Error::BadHeader(header.join(",")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let field = FieldLabel::parse(&rec[1]).ok_or_else(|| Error::MalformedRow {
            row,
            reason: format!("unknown field {:?}", &rec[1]),
        })?;
        let discipline = DisciplineLabel::parse(&rec[2]).ok_or_else(|| Error::MalformedRow {
            row,
            reason: format!("unknown discipline {:?}", &rec[2]),
        })?;
        out.push((rec[0].to_owned(), field, discipline));
    }
    Ok(out)
}

pub fn write_genders_csv<W: Write>(rows: &[GenderRecord], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(GENDERS_COLUMNS)?;
    for g in rows {
        w.write_record([
            g.researcher_id.as_str(),
            g.gender.as_str(),
            g.source.as_str(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<genders>", e))
}

pub fn read_genders_csv<R: Read>(r: R) -> Result<Vec<GenderRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != GENDERS_COLUMNS {
        return Err(Error::BadHeader(header.join(",")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let gender: Gender = rec[1]
            .parse()
            .map_err(|reason| Error::MalformedRow { row, reason })?;
        let source = match &rec[2] {
            "table" => GenderSource::Table,
            "unknown" => GenderSource::Unknown,
            other => {
                return Err(Error::MalformedRow {
                    row,
                    reason: format!("unknown source {other:?}"),
                })
            }
        };
        out.push(GenderRecord {
            researcher_id: rec[0].to_owned(),
            gender,
            source,
        });
    }
    Ok(out)
}

/// Rebuild assignment rows from their file form, with z-scores absent.
pub fn assignments_from_labels(
    rows: Vec<(String, FieldLabel, DisciplineLabel)>,
) -> Vec<DisciplineAssignment> {
    rows.into_iter()
        .map(|(researcher_id, field, discipline)| DisciplineAssignment {
            researcher_id,
            field,
            discipline,
            discipline_z: vec![None; N_DISCIPLINES],
            field_z: vec![None; N_FIELDS],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobility::MobilityType;

    fn rec_with(codes: &[u16]) -> AuthorshipRecord {
        AuthorshipRecord {
            record_id: "r".into(),
            author_id: "a".into(),
            publication_id: "p".into(),
            year: 2000,
            affiliation_text: String::new(),
            country: None,
            asjc_codes: codes.to_vec(),
            citation_count: 0,
            given_name: String::new(),
            surname: "S".into(),
            coauthor_ids: vec![],
            funding_texts: vec![],
            grant_numbers: vec![],
            country_imputed: false,
        }
    }

    #[test]
    fn frequencies_count_code_occurrences() {
        let f = field_frequencies([&rec_with(&[3100, 3100, 2200])]).unwrap();
        let m = f.discipline_map();
        assert_eq!(m.len(), 2);
        assert!((m["Physics and Astronomy"] - 2.0 / 3.0).abs() < 1e-15);
        assert!((m["Engineering"] - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.fields[Field::PhysicalSciences.index()] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_code_is_certain() {
        let f = field_frequencies([&rec_with(&[2700])]).unwrap();
        assert_eq!(f.discipline_map()["Medicine"], 1.0);
    }

    #[test]
    fn no_mapped_codes_is_unclassifiable() {
        assert!(field_frequencies([&rec_with(&[])]).is_none());
        assert!(field_frequencies([&rec_with(&[1000])]).is_none());
        let stats = population_stats(&[]);
        let a = assign_discipline("x", None, &stats, 1.0);
        assert_eq!(a.discipline, Label::Multidisciplinary);
        assert_eq!(a.field, Label::Multidisciplinary);
    }

    fn stats_with(d: usize, mean: f64, std: f64) -> PopulationStats {
        let mut disciplines = vec![
            Moments {
                mean: 0.0,
                std: 0.0
            };
            N_DISCIPLINES
        ];
        disciplines[d] = Moments { mean, std };
        PopulationStats {
            disciplines,
            fields: vec![
                Moments {
                    mean: 0.0,
                    std: 0.0
                };
                N_FIELDS
            ],
            n: 10,
        }
    }

    #[test]
    fn large_z_assigns() {
        let d = discipline_index(3100).unwrap();
        let f = field_frequencies([&rec_with(&[3100])]).unwrap();
        let a = assign_discipline("x", Some(&f), &stats_with(d, 0.2, 0.1), 1.0);
        assert!((a.discipline_z[d].unwrap() - 8.0).abs() < 1e-12);
        assert_eq!(a.discipline, Label::Assigned(d));
    }

    #[test]
    fn small_z_is_multidisciplinary() {
        let d = discipline_index(3100).unwrap();
        let f = field_frequencies([&rec_with(&[3100])]).unwrap();
        let a = assign_discipline("x", Some(&f), &stats_with(d, 0.5, 0.5), 1.0);
        assert_eq!(a.discipline_z[d], Some(1.0));
        assert_eq!(a.discipline, Label::Multidisciplinary);
    }

    #[test]
    fn argmax_first_on_ties_and_shift_invariant() {
        let z = [Some(2.0), None, Some(3.0), Some(3.0)];
        assert_eq!(argmax_above(&z, 1.0), Some(2));
        let shifted: Vec<_> = z.iter().map(|v| v.map(|x| x + 5.0)).collect();
        assert_eq!(argmax_above(&shifted, 6.0), Some(2));
        assert_eq!(argmax_above(&z, 3.0), None);
    }

    #[test]
    fn population_std_divides_by_n() {
        let a = field_frequencies([&rec_with(&[3100])]).unwrap();
        let b = field_frequencies([&rec_with(&[2200])]).unwrap();
        let s = population_stats(&[a, b]);
        let d = discipline_index(3100).unwrap();
        assert_eq!(s.disciplines[d].mean, 0.5);
        assert_eq!(s.disciplines[d].std, 0.5);
        assert!(s.degenerate_disciplines().contains(&"Medicine"));
    }

    fn class(id: &str, t: MobilityType) -> MobilityClassification {
        MobilityClassification {
            researcher_id: id.into(),
            mobility_type: t,
            academic_origin: None,
            academic_destination: None,
        }
    }

    fn setup(
        n_male: usize,
        n_female: usize,
        t: MobilityType,
    ) -> (
        Vec<MobilityClassification>,
        Vec<DisciplineAssignment>,
        Vec<GenderRecord>,
    ) {
        let mut classes = Vec::new();
        let mut genders = Vec::new();
        for i in 0..n_male + n_female + 3 {
            let id = format!("r{i}");
            classes.push(class(&id, t));
            let gender = if i < n_male {
                Gender::Male
            } else if i < n_male + n_female {
                Gender::Female
            } else {
                Gender::Unknown
            };
            genders.push(GenderRecord {
                researcher_id: id,
                gender,
                source: GenderSource::Table,
            });
        }
        let d = discipline_index(2200).unwrap();
        let assignments = assignments_from_labels(
            classes
                .iter()
                .map(|c| {
                    (
                        c.researcher_id.clone(),
                        Label::Assigned(Field::PhysicalSciences),
                        Label::Assigned(d),
                    )
                })
                .collect(),
        );
        (classes, assignments, genders)
    }

    #[test]
    fn ratio_counts_known_genders_only() {
        let (c, a, g) = setup(80, 10, MobilityType::Immigrant);
        let r = gender_ratio_by_discipline(&c, &a, &g, Subset::All);
        let cell = r["Engineering"];
        assert_eq!((cell.male, cell.female), (80, 10));
        assert_eq!(cell.ratio, Some(8.0));
    }

    #[test]
    fn zero_women_is_undefined() {
        let (c, a, g) = setup(5, 0, MobilityType::Emigrant);
        assert_eq!(
            gender_ratio_by_discipline(&c, &a, &g, Subset::All)["Engineering"].ratio,
            None
        );
    }

    #[test]
    fn migrant_subset_filters_types() {
        let (c, a, g) = setup(4, 2, MobilityType::NonMover);
        assert!(gender_ratio_by_discipline(&c, &a, &g, Subset::Migrants).is_empty());
        assert_eq!(
            gender_ratio_by_discipline(&c, &a, &g, Subset::All)["Engineering"].ratio,
            Some(2.0)
        );
    }

    #[test]
    fn label_files_round_trip() {
        let (_, a, g) = setup(2, 1, MobilityType::Transient);
        let mut buf = Vec::new();
        write_assignments_csv(&a, &mut buf).unwrap();
        let back = assignments_from_labels(read_assignments_csv(buf.as_slice()).unwrap());
        assert_eq!(back, a);
        let mut buf = Vec::new();
        write_genders_csv(&g, &mut buf).unwrap();
        assert_eq!(read_genders_csv(buf.as_slice()).unwrap(), g);
    }
}
