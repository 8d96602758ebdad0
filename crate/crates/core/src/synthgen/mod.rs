//! Seeded synthetic corpora with planted careers and their ground truth.
//!
//! Every researcher publishes in consecutive years. A career is a list of
//! country segments; within a segment every record of a year carries the
//! segment country, so the yearly mode is that country alone. A tie year
//! (optional, at the first year of a segment that lasts at least two years)
//! has equally many records in the old and the new country; the move is then
//! detected one year later. Citation counts per record are geometric with
//! mean `mu` of the researcher's discipline:
//! `floor(ln(U) / ln(1 - p))` with `p = 1 / (1 + mu)` and `U` uniform in `(0, 1]`.

mod score;
mod truth;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use score::{score_pipeline, PipelineOutputs, ScoreCard};
pub use truth::{Collision, GroundTruth, PersonTruth, TrueEvent, YearModes};

use crate::country::CountryCode;
use crate::country_infer::fnv1a64;
use crate::error::{Error, Result};
use crate::ingest::{corpus_fingerprint, AuthorshipRecord, Corpus, YearWindow};
use crate::mobility::MobilityType;
use crate::rng::SeededRng;
use crate::taxonomy_gender::{Field, Gender, NameGenderTable, DISCIPLINES};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedMoves {
    pub origin: CountryCode,
    pub destination: CountryCode,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub seed: u64,
    /// Number of persons, including both members of every collision.
    pub n_researchers: usize,
    pub window: YearWindow,
    pub snapshot_date: NaiveDate,
    pub focal: CountryCode,
    pub country_pool: Vec<CountryCode>,
    pub p_single: f64,
    /// Persons never affiliated with the focal country.
    pub p_foreign_only: f64,
    pub p_migration: f64,
    pub p_tie_year: f64,
    /// Pairs of persons sharing one author ID.
    pub n_id_collisions: usize,
    /// Single persons with more publications than the suspicion threshold.
    pub n_prolific: usize,
    pub p_mask_country: f64,
    /// Mask exactly this many records instead of drawing with `p_mask_country`.
    pub n_masked: Option<usize>,
    pub p_initial_name: f64,
    pub max_career_years: usize,
    pub max_pubs_per_year: usize,
    pub planted: Vec<PlantedMoves>,
    /// Mean citations per record by discipline name; missing disciplines use
    /// the field default.
    pub citation_means: BTreeMap<String, f64>,
    /// Name table to sample given names from; the bundled table if unset.
    pub names: Option<PathBuf>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 42,
            n_researchers: 1000,
            window: YearWindow::default(),
            snapshot_date: NaiveDate::from_ymd_opt(2020, 4, 1).unwrap(),
            focal: CountryCode::new("DE").unwrap(),
            country_pool: [
                "DE", "US", "GB", "FR", "NL", "CH", "IT", "ES", "AT", "CN", "JP", "IN", "CA", "AU",
                "SE", "BR",
            ]
            .iter()
            .map(|c| CountryCode::new(c).unwrap())
            .collect(),
            p_single: 0.35,
            p_foreign_only: 0.1,
            p_migration: 0.3,
            p_tie_year: 0.05,
            n_id_collisions: 10,
            n_prolific: 5,
            p_mask_country: 0.01,
            n_masked: None,
            p_initial_name: 0.05,
            max_career_years: 20,
            max_pubs_per_year: 3,
            planted: Vec::new(),
            citation_means: BTreeMap::new(),
            names: None,
        }
    }
}

fn field_citation_mean(field: Field) -> f64 {
    match field {
        Field::HealthSciences => 12.0,
        Field::LifeSciences => 15.0,
        Field::PhysicalSciences => 8.0,
        Field::SocialSciences => 4.0,
    }
}

const PROLIFIC_PUBLICATIONS: usize = 300;
const COLLISION_PUBLICATIONS: usize = 150;

impl SynthSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: SynthSpec = toml::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.check()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        for (name, p) in [
            ("p_single", self.p_single),
            ("p_foreign_only", self.p_foreign_only),
            ("p_migration", self.p_migration),
            ("p_tie_year", self.p_tie_year),
            ("p_mask_country", self.p_mask_country),
            ("p_initial_name", self.p_initial_name),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.window.start_year > self.window.end_year || self.window.len() < 3 {
            return bad("window must span at least three years".into());
        }
        if self.max_career_years < 3 || self.max_pubs_per_year == 0 {
            return bad(
                "max_career_years must be at least 3 and max_pubs_per_year positive".into(),
            );
        }
        if self.n_id_collisions > self.n_researchers / 2 {
            return bad(format!(
                "{} collisions need {} researchers, only {} requested",
                self.n_id_collisions,
                2 * self.n_id_collisions,
                self.n_researchers
            ));
        }
        let planted: usize = self.planted.iter().map(|p| p.count).sum();
        if 2 * self.n_id_collisions + self.n_prolific + planted > self.n_researchers {
            return bad("collisions, prolific and planted researchers exceed n_researchers".into());
        }
        let pool: BTreeSet<_> = self.country_pool.iter().collect();
        if pool.len() != self.country_pool.len() {
            return bad("country_pool has duplicates".into());
        }
        if pool.len() < 4 || !pool.contains(&self.focal) {
            return bad("country_pool needs the focal country and at least three others".into());
        }
        if let Some(c) = self.country_pool.iter().find(|c| c.name().is_none()) {
            return bad(format!("country {c} has no known name"));
        }
        for p in &self.planted {
            if p.origin == p.destination
                || p.origin.name().is_none()
                || p.destination.name().is_none()
            {
                return bad(format!(
                    "planted move {}->{} is invalid",
                    p.origin, p.destination
                ));
            }
        }
        for (name, mu) in &self.citation_means {
            if !DISCIPLINES.iter().any(|d| d.name == name) {
                return bad(format!("unknown discipline {name:?} in citation_means"));
            }
            if !(mu.is_finite() && *mu >= 0.0) {
                return bad(format!("citation mean for {name:?} must be non-negative"));
            }
        }
        if let Some(n) = self.n_masked {
            if n > 0 && self.n_researchers == 0 {
                return bad("cannot mask records of an empty corpus".into());
            }
        }
        Ok(())
    }

    fn citation_mean(&self, discipline: usize) -> f64 {
        let d = &DISCIPLINES[discipline];
        self.citation_means
            .get(d.name)
            .copied()
            .unwrap_or_else(|| field_citation_mean(d.field))
    }

    fn name_table(&self) -> Result<NameGenderTable> {
        match &self.names {
            Some(p) => NameGenderTable::from_path(p),
            None => Ok(NameGenderTable::bundled()),
        }
    }
}

const SURNAMES: [&str; 40] = [
    "Schmidt",
    "Müller",
    "Weber",
    "Wagner",
    "Becker",
    "Hoffmann",
    "Koch",
    "Richter",
    "Smith",
    "Johnson",
    "Brown",
    "Garcia",
    "Martin",
    "Bernard",
    "Dubois",
    "Rossi",
    "Russo",
    "Novak",
    "Kowalski",
    "Nowak",
    "Jensen",
    "Nielsen",
    "Andersson",
    "Silva",
    "Santos",
    "Wang",
    "Li",
    "Zhang",
    "Chen",
    "Tanaka",
    "Suzuki",
    "Sato",
    "Kumar",
    "Singh",
    "Patel",
    "Kim",
    "Park",
    "Ivanov",
    "Yilmaz",
    "Cohen",
];
const FUNDERS: [&str; 8] = [
    "Deutsche Forschungsgemeinschaft",
    "National Science Foundation",
    "European Research Council",
    "Wellcome Trust",
    "Swiss National Science Foundation",
    "National Natural Science Foundation of China",
    "Japan Society for the Promotion of Science",
    "Horizon 2020",
];
const SYLLABLES: [&str; 16] = [
    "ber", "lin", "ro", "stok", "ma", "del", "vik", "sa", "ran", "to", "ka", "mo", "len", "burg",
    "fa", "ri",
];

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Four city names per country, fixed by the country code alone.
fn cities(code: CountryCode) -> Vec<String> {
    let mut rng = SeededRng::new(fnv1a64(code.as_str()));
    (0..4)
        .map(|_| {
            let n = 2 + rng.below(2);
            capitalize(&(0..n).map(|_| *rng.choose(&SYLLABLES)).collect::<String>())
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Identity {
    person: usize,
    author_id: String,
    given: String,
    surname: String,
    discipline: usize,
    funder: &'static str,
}

struct Builder<'a> {
    spec: &'a SynthSpec,
    rng: SeededRng,
    names: Vec<(String, Gender)>,
    cities: BTreeMap<CountryCode, Vec<String>>,
    records: Vec<AuthorshipRecord>,
    persons: Vec<PersonTruth>,
    record_person: BTreeMap<String, usize>,
}

impl<'a> Builder<'a> {
    fn foreign(&self) -> Vec<CountryCode> {
        self.spec
            .country_pool
            .iter()
            .copied()
            .filter(|c| *c != self.spec.focal)
            .collect()
    }

    fn pick_other(&mut self, from: &[CountryCode], not: &[CountryCode]) -> Option<CountryCode> {
        let options: Vec<CountryCode> = from.iter().copied().filter(|c| !not.contains(c)).collect();
        if options.is_empty() {
            None
        } else {
            Some(*self.rng.choose(&options))
        }
    }

    /// Country segments of a focal-linked career, possibly with moves.
    fn focal_segments(&mut self, migrate: bool) -> Vec<CountryCode> {
        let f = self.spec.focal;
        let foreign = self.foreign();
        if !migrate {
            return vec![f];
        }
        let x = *self.rng.choose(&foreign);
        let extra = self.rng.bernoulli(0.25);
        let y = self.pick_other(&foreign, &[x]).unwrap();
        let u = self.rng.uniform();
        if u < 0.3 {
            if extra {
                vec![x, y, f]
            } else {
                vec![x, f]
            }
        } else if u < 0.65 {
            if extra {
                vec![f, x, y]
            } else {
                vec![f, x]
            }
        } else if u < 0.85 {
            vec![f, x, f]
        } else {
            vec![x, f, y]
        }
    }

    fn foreign_segments(&mut self, migrate: bool, exclude: &[CountryCode]) -> Vec<CountryCode> {
        let mut not = exclude.to_vec();
        not.push(self.spec.focal);
        let foreign = self.foreign();
        let x = self
            .pick_other(&foreign, &not)
            .expect("country pool checked");
        if migrate {
            not.push(x);
            if let Some(y) = self.pick_other(&foreign, &not) {
                return vec![x, y];
            }
        }
        vec![x]
    }

    fn new_identity(
        &mut self,
        person: usize,
        author_id: String,
        avoid_initial: Option<char>,
    ) -> Result<(Identity, Gender)> {
        let (given, gender) = match avoid_initial {
            None => self.rng.choose(&self.names).clone(),
            Some(c) => {
                let options: Vec<&(String, Gender)> = self
                    .names
                    .iter()
                    .filter(|(n, _)| !n.starts_with(c))
                    .collect();
                if options.is_empty() {
                    return Err(Error::InvalidSpec(
                        "name table has a single initial; cannot build collisions".into(),
                    ));
                }
                (*self.rng.choose(&options)).clone()
            }
        };
        let surname = self.rng.choose(&SURNAMES).to_string();
        let id = Identity {
            person,
            author_id,
            given: capitalize(&given),
            surname,
            discipline: self.rng.below(DISCIPLINES.len()),
            funder: self.rng.choose(&FUNDERS),
        };
        Ok((id, gender))
    }

    fn push_record(&mut self, id: &Identity, year: i32, country: CountryCode) {
        let n = self.records.len();
        let rng = &mut self.rng;
        let city = rng.choose(&self.cities[&country]).clone();
        let d = &DISCIPLINES[id.discipline];
        let unit = match rng.below(4) {
            0 => format!("University of {city}"),
            1 => format!("{city} Institute of Technology"),
            2 => format!("Department of {}, {city} University", d.name),
            _ => "Center for Advanced Research".to_owned(),
        };
        let affiliation_text = format!(
            "{unit}, {} {city}, {}",
            10000 + rng.below(90000),
            country.name().unwrap()
        );

        let mut asjc_codes: Vec<u16> = (0..1 + rng.below(2))
            .map(|_| {
                let di = if rng.bernoulli(0.85) {
                    id.discipline
                } else {
                    rng.below(DISCIPLINES.len())
                };
                DISCIPLINES[di].prefix * 100 + rng.below(50) as u16
            })
            .collect();
        asjc_codes.sort_unstable();
        asjc_codes.dedup();

        let mu = self.spec.citation_mean(id.discipline);
        let citation_count = if mu == 0.0 {
            0
        } else {
            let p = 1.0 / (1.0 + mu);
            let u = 1.0 - rng.uniform();
            (u.ln() / (1.0 - p).ln()).floor().min(1e9) as i64
        };

        let mut coauthor_ids: Vec<String> = (0..1 + rng.below(3))
            .map(|_| format!("C{}_{}", id.person, rng.below(8)))
            .collect();
        coauthor_ids.sort();
        coauthor_ids.dedup();
        let funding_texts = if rng.bernoulli(0.3) {
            vec![id.funder.to_owned()]
        } else {
            vec![]
        };
        let grant_numbers = if rng.bernoulli(0.2) {
            vec![format!("GR-{}-{}", id.person, rng.below(2))]
        } else {
            vec![]
        };
        let given_name = if rng.bernoulli(self.spec.p_initial_name) {
            format!("{}.", id.given.chars().next().unwrap())
        } else {
            id.given.clone()
        };

        let record_id = format!("R{n:07}");
        self.record_person.insert(record_id.clone(), id.person);
        self.records.push(AuthorshipRecord {
            record_id,
            author_id: id.author_id.clone(),
            publication_id: format!("P{n:07}"),
            year,
            affiliation_text,
            country: Some(country),
            asjc_codes,
            citation_count,
            given_name,
            surname: id.surname.clone(),
            coauthor_ids,
            funding_texts,
            grant_numbers,
            country_imputed: false,
        });
    }

    /// Emit a career over `len` consecutive years split into one segment
    /// per entry of `segments`. Returns the yearly modes and the events the
    /// detector must find.
    fn career(
        &mut self,
        id: &Identity,
        segments: &[CountryCode],
        len: usize,
        pubs: (usize, usize),
    ) -> (Vec<YearModes>, Vec<TrueEvent>) {
        let w = self.spec.window;
        let n = segments.len();
        debug_assert!(len >= n && len as i32 <= w.len());
        let start = self
            .rng
            .range_inclusive(w.start_year as i64, (w.end_year - len as i32 + 1) as i64)
            as i32;
        let mut cuts: Vec<usize> = (1..len).collect();
        self.rng.shuffle(&mut cuts);
        cuts.truncate(n - 1);
        cuts.sort_unstable();
        let mut bounds = vec![0];
        bounds.extend(cuts);
        bounds.push(len);

        let mut modes = Vec::with_capacity(len);
        let mut events = Vec::new();
        for s in 0..n {
            let seg_len = bounds[s + 1] - bounds[s];
            let tie = s > 0 && seg_len >= 2 && self.rng.bernoulli(self.spec.p_tie_year);
            if s > 0 {
                let first = start + bounds[s] as i32;
                events.push(TrueEvent {
                    year: if tie { first + 1 } else { first },
                    origin: segments[s - 1],
                    destination: segments[s],
                });
            }
            for k in bounds[s]..bounds[s + 1] {
                let year = start + k as i32;
                let count = self.rng.range_inclusive(pubs.0 as i64, pubs.1 as i64) as usize;
                let mut countries = vec![segments[s]];
                if tie && k == bounds[s] {
                    countries.push(segments[s - 1]);
                }
                for c in &countries {
                    for _ in 0..count {
                        self.push_record(id, year, *c);
                    }
                }
                countries.sort();
                modes.push(YearModes { year, countries });
            }
        }
        (modes, events)
    }

    fn career_len(&mut self, min: usize) -> usize {
        let max = self
            .spec
            .max_career_years
            .min(self.spec.window.len() as usize);
        let min = min.max(2).min(max);
        self.rng.range_inclusive(min as i64, max as i64) as usize
    }

    fn full_len(&self) -> usize {
        self.spec
            .max_career_years
            .min(self.spec.window.len() as usize)
    }

    #[allow(clippy::too_many_arguments)]
    fn record_person(
        &mut self,
        id: &Identity,
        gender: Gender,
        segments: &[CountryCode],
        single: bool,
        modes: Vec<YearModes>,
        events: Vec<TrueEvent>,
        n_records: usize,
    ) {
        let mobility_type = planted_type(single, segments, !events.is_empty(), self.spec.focal);
        self.persons.push(PersonTruth {
            person: id.person,
            author_id: id.author_id.clone(),
            given_name: id.given.clone(),
            surname: id.surname.clone(),
            gender,
            discipline: DISCIPLINES[id.discipline].name.to_owned(),
            mobility_type,
            trajectory: modes,
            events,
            n_records,
        });
    }

    fn person(
        &mut self,
        id: Identity,
        gender: Gender,
        segments: Vec<CountryCode>,
        len: usize,
        pubs: (usize, usize),
    ) {
        let before = self.records.len();
        let (modes, events) = self.career(&id, &segments, len, pubs);
        let n = self.records.len() - before;
        self.record_person(&id, gender, &segments, false, modes, events, n);
    }

    fn single(&mut self, id: Identity, gender: Gender, country: CountryCode) {
        let w = self.spec.window;
        let year = self
            .rng
            .range_inclusive(w.start_year as i64, w.end_year as i64) as i32;
        self.push_record(&id, year, country);
        let modes = vec![YearModes {
            year,
            countries: vec![country],
        }];
        self.record_person(&id, gender, &[country], true, modes, vec![], 1);
    }
}

fn planted_type(
    single: bool,
    segments: &[CountryCode],
    moved: bool,
    focal: CountryCode,
) -> Option<MobilityType> {
    if !segments.contains(&focal) {
        return None;
    }
    if single {
        return Some(MobilityType::SinglePaperAuthor);
    }
    if segments.iter().all(|c| *c == focal) {
        return Some(MobilityType::NonMover);
    }
    let (o, d) = (segments[0] == focal, segments[segments.len() - 1] == focal);
    Some(match (o, d) {
        (false, true) => MobilityType::Immigrant,
        (true, false) => MobilityType::Emigrant,
        (true, true) if moved => MobilityType::ReturnMigrant,
        (true, true) => MobilityType::NonMover,
        (false, false) => MobilityType::Transient,
    })
}

/// Generate a corpus and its ground truth. The output depends only on the
/// spec (and the name table it references).
pub fn generate_corpus(spec: &SynthSpec) -> Result<(Corpus, GroundTruth)> {
    spec.check()?;
    let table = spec.name_table()?;
    let names: Vec<(String, Gender)> = table
        .iter()
        .filter(|(n, _)| !n.is_empty())
        .map(|(n, e)| (n.to_owned(), e.gender))
        .collect();
    if names.is_empty() {
        return Err(Error::InvalidSpec("name table is empty".into()));
    }
    let mut b = Builder {
        spec,
        rng: SeededRng::new(spec.seed),
        names,
        cities: spec
            .country_pool
            .iter()
            .chain(
                spec.planted
                    .iter()
                    .flat_map(|p| [&p.origin, &p.destination]),
            )
            .map(|c| (*c, cities(*c)))
            .collect(),
        records: Vec::new(),
        persons: Vec::new(),
        record_person: BTreeMap::new(),
    };
    let full = b.full_len();
    let mut collisions = Vec::new();
    let mut person = 0;

    for _ in 0..spec.n_id_collisions {
        let author_id = format!("A{person:06}");
        let pubs = COLLISION_PUBLICATIONS.div_ceil(full);
        let (a, ga) = b.new_identity(person, author_id.clone(), None)?;
        let migrate = b.rng.bernoulli(spec.p_migration);
        let seg_a = b.focal_segments(migrate);
        let initial = a.given.to_lowercase().chars().next();
        let surname = a.surname.clone();
        b.person(a, ga, seg_a.clone(), full, (pubs, pubs + 2));

        let (mut partner, gb) = b.new_identity(person + 1, author_id.clone(), initial)?;
        partner.surname = surname;
        let migrate = b.rng.bernoulli(spec.p_migration);
        let seg_b = b.foreign_segments(migrate, &seg_a);
        b.person(partner, gb, seg_b, full, (pubs, pubs + 2));
        collisions.push(Collision {
            author_id,
            persons: vec![person, person + 1],
        });
        person += 2;
    }
    for _ in 0..spec.n_prolific {
        let (id, g) = b.new_identity(person, format!("A{person:06}"), None)?;
        let pubs = PROLIFIC_PUBLICATIONS.div_ceil(full);
        let migrate = b.rng.bernoulli(spec.p_migration);
        let seg = b.focal_segments(migrate);
        b.person(id, g, seg, full, (pubs, pubs + 2));
        person += 1;
    }
    for p in &spec.planted {
        for _ in 0..p.count {
            let (id, g) = b.new_identity(person, format!("A{person:06}"), None)?;
            let len = b.career_len(2);
            b.person(
                id,
                g,
                vec![p.origin, p.destination],
                len,
                (1, spec.max_pubs_per_year),
            );
            person += 1;
        }
    }
    while person < spec.n_researchers {
        let (id, g) = b.new_identity(person, format!("A{person:06}"), None)?;
        let single = b.rng.bernoulli(spec.p_single);
        let foreign_only = b.rng.bernoulli(spec.p_foreign_only);
        if single {
            let country = if foreign_only {
                *b.rng.choose(&b.foreign())
            } else {
                spec.focal
            };
            b.single(id, g, country);
        } else {
            let migrate = b.rng.bernoulli(spec.p_migration);
            let seg = if foreign_only {
                b.foreign_segments(migrate, &[])
            } else {
                b.focal_segments(migrate)
            };
            let len = b.career_len(seg.len());
            b.person(id, g, seg, len, (1, spec.max_pubs_per_year));
        }
        person += 1;
    }

    let mut masked = BTreeMap::new();
    let n = b.records.len();
    let chosen: Vec<usize> = match spec.n_masked {
        Some(k) => {
            let mut idx: Vec<usize> = (0..n).collect();
            b.rng.shuffle(&mut idx);
            idx.truncate(k.min(n));
            idx.sort_unstable();
            idx
        }
        None => (0..n)
            .filter(|_| b.rng.bernoulli(spec.p_mask_country))
            .collect(),
    };
    for i in chosen {
        let r = &mut b.records[i];
        masked.insert(r.record_id.clone(), r.country.take().unwrap());
    }

    let corpus = Corpus {
        records: b.records,
        window: spec.window,
        snapshot_date: spec.snapshot_date,
    };
    let truth = GroundTruth {
        run_id: corpus_fingerprint(&corpus)?,
        seed: spec.seed,
        focal: spec.focal,
        n_records: corpus.records.len(),
        persons: b.persons,
        record_person: b.record_person,
        collisions,
        masked,
    };
    Ok((corpus, truth))
}
