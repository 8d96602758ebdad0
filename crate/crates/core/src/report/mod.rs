//! End-to-end pipeline and the report bundle.
//!
//! Stages exchange data only through files under `<out>/intermediate/`:
//!
//! | stage        | reads                        | writes                                          |
//! |--------------|------------------------------|-------------------------------------------------|
//! | ingest       | input corpus                 | `corpus.csv`, `ingest_report.json`              |
//! | fill-country | `corpus.csv`                 | `corpus_filled.csv`, `fill_report.json`, model  |
//! | disambiguate | `corpus_filled.csv`          | `corpus_disamb.csv`, `disambig_report.json`     |
//! | mobility     | `corpus_disamb.csv`          | `events.csv`, `classes.csv`                     |
//! | classify     | `corpus_disamb.csv`          | `assignments.csv`, `genders.csv`                |
//! | report       | all of the above             | report tables and `manifest.json` in `<out>`    |
//!
//! A failed run leaves a `STALE` file naming the stage in `<out>`.

pub mod tables;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use tables::{
    citation_stats, corridor_composition, emit_reports, gender_ratio_table, mobility_table,
    read_table, CitationStatRow, CorridorRow, Direction, GenderRatioRow, MobilityRow, ReportBundle,
    CITATION_PROFILES, CITATION_STATS, CORRIDORS, FLOWS_IN, FLOWS_OUT, GENDER_RATIOS,
    MOBILITY_TABLE, NMR, REPORT_FILES, UNDEFINED,
};

use crate::country::CountryCode;
use crate::country_infer::{
    fill_missing_countries, train_country_model, CountryModel, FillReport, TrainConfig,
};
use crate::disambig::{disambiguate, DisambigConfig, DisambigReport, ScoreTable};
use crate::error::{Error, Result};
use crate::ingest::{
    corpus_fingerprint, parse_corpus, write_corpus, Corpus, IngestConfig, ParseReport,
};
use crate::metrics::{aggregate_flows, citation_profiles, nmr_series, NmrConfig};
use crate::mobility::{
    analyze_corpus, read_classes_csv, read_events_csv, write_classes_csv, write_events_csv,
    MigrationEvent, MobilityClassification,
};
use crate::synthgen::{
    generate_corpus, score_pipeline, GroundTruth, PipelineOutputs, ScoreCard, SynthSpec,
};
use crate::taxonomy_gender::{
    assign_corpus, assignments_from_labels, genders_for_corpus, read_assignments_csv,
    read_genders_csv, write_assignments_csv, write_genders_csv, DisciplineAssignment, GenderGates,
    GenderRecord, NameGenderTable,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Input corpus (`.csv` or `.jsonl`). Without it a `[synth]` section is required.
    pub input: Option<PathBuf>,
    pub synth: Option<SynthSpec>,
    pub focal: CountryCode,
    /// Year for academic age; the window end year if unset.
    pub reference_year: Option<i32>,
    pub discipline_threshold: f64,
    /// Name-gender table; the bundled table if unset.
    pub names: Option<PathBuf>,
    /// Similarity weights file; replaces `disambig.weights` when set.
    pub weights: Option<PathBuf>,
    /// Pretrained country model; trained on the corpus if unset.
    pub country_model: Option<PathBuf>,
    pub ingest: IngestConfig,
    pub country: TrainConfig,
    pub disambig: DisambigConfig,
    pub nmr: NmrConfig,
    pub gender: GenderGates,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            synth: None,
            focal: CountryCode::new("DE").unwrap(),
            reference_year: None,
            discipline_threshold: 1.0,
            names: None,
            weights: None,
            country_model: None,
            ingest: IngestConfig::default(),
            country: TrainConfig::default(),
            disambig: DisambigConfig::default(),
            nmr: NmrConfig::default(),
            gender: GenderGates::default(),
            base_dir: PathBuf::new(),
        }
    }
}

impl PipelineConfig {
    /// Parse TOML; relative paths resolve against `base_dir`.
    pub fn from_toml_str(s: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig =
            toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_owned();
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&s, path.parent().unwrap_or(Path::new("")))
    }

    pub fn check(&self) -> Result<()> {
        if self.input.is_none() && self.synth.is_none() {
            return Err(Error::Config(
                "either `input` or a [synth] section is required".into(),
            ));
        }
        if self.input.is_some() && self.synth.is_some() {
            return Err(Error::Config(
                "`input` and [synth] are mutually exclusive".into(),
            ));
        }
        if !self.focal.is_known() {
            return Err(Error::Config(format!(
                "unknown focal country {}",
                self.focal
            )));
        }
        if !self.discipline_threshold.is_finite() {
            return Err(Error::Config("discipline_threshold must be finite".into()));
        }
        if let Some(s) = &self.synth {
            s.check()?;
        }
        self.ingest.check()?;
        self.country.check()?;
        self.disambig.weights.check()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_owned()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Ingest settings for this run: a synthesized corpus brings its own window.
    pub fn effective_ingest(&self) -> IngestConfig {
        let mut c = self.ingest.clone();
        if let Some(s) = &self.synth {
            c.window = s.window;
            c.snapshot_date = s.snapshot_date;
        }
        c
    }

    pub fn name_table(&self) -> Result<NameGenderTable> {
        match &self.names {
            Some(p) => NameGenderTable::from_path(&self.resolve(p)),
            None => Ok(NameGenderTable::bundled()),
        }
    }

    pub fn disambig_config(&self) -> Result<DisambigConfig> {
        let mut c = self.disambig.clone();
        if let Some(p) = &self.weights {
            c.weights = ScoreTable::from_path(&self.resolve(p))?;
        }
        Ok(c)
    }
}

/// Intermediate file locations of a run.
#[derive(Debug, Clone)]
pub struct RunPaths {
    pub out: PathBuf,
    pub dir: PathBuf,
}

impl RunPaths {
    pub fn new(out: &Path) -> Self {
        RunPaths {
            out: out.to_owned(),
            dir: out.join("intermediate"),
        }
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

pub const MANIFEST: &str = "manifest.json";
pub const STALE: &str = "STALE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_manifest_sha256: String,
    pub tool_version: String,
    pub config_sha256: String,
    /// SHA-256 of every input by role; the corpus entry is its fingerprint.
    pub inputs: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    pub focal: CountryCode,
    pub reference_year: i32,
    /// SHA-256 of each report file.
    pub files: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(
        &std::fs::read(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn stage<T>(name: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

/// Read a corpus written by an earlier stage. Any malformed row is an error.
pub fn read_intermediate_corpus(path: &Path, ingest: &IngestConfig) -> Result<Corpus> {
    let cfg = IngestConfig {
        strict: true,
        ..ingest.clone()
    };
    Ok(parse_corpus(path, &cfg)?.0)
}

pub fn read_events(path: &Path) -> Result<Vec<MigrationEvent>> {
    read_events_csv(open(path)?)
}

pub fn read_classes(path: &Path) -> Result<Vec<MobilityClassification>> {
    read_classes_csv(open(path)?)
}

pub fn read_assignments(path: &Path) -> Result<Vec<DisciplineAssignment>> {
    Ok(assignments_from_labels(read_assignments_csv(open(path)?)?))
}

pub fn read_genders(path: &Path) -> Result<Vec<GenderRecord>> {
    read_genders_csv(open(path)?)
}

/// Fill missing countries. A model is trained only when some record lacks
/// a country and no pretrained model is given.
pub fn fill_stage(
    corpus: &Corpus,
    cfg: &TrainConfig,
    pretrained: Option<&Path>,
    model_out: Option<&Path>,
) -> Result<(Corpus, FillReport)> {
    if corpus.records.iter().all(|r| r.country.is_some()) {
        let report = FillReport {
            n_records: corpus.len(),
            already_present: corpus.len(),
            ..FillReport::default()
        };
        return Ok((corpus.clone(), report));
    }
    let model = match pretrained {
        Some(p) => CountryModel::load(p)?,
        None => {
            let m = train_country_model(corpus, cfg)?;
            if let Some(out) = model_out {
                m.save(out)?;
            }
            m
        }
    };
    Ok(fill_missing_countries(corpus, &model))
}

/// Discipline assignments and genders for every author ID of the corpus.
pub fn classify_stage(
    corpus: &Corpus,
    threshold: f64,
    names: &NameGenderTable,
    gates: GenderGates,
) -> (Vec<DisciplineAssignment>, Vec<GenderRecord>) {
    let (assignments, _) = assign_corpus(corpus, threshold);
    (assignments, genders_for_corpus(corpus, names, gates))
}

pub struct MetricsInputs<'a> {
    pub corpus: &'a Corpus,
    pub events: &'a [MigrationEvent],
    pub classes: &'a [MobilityClassification],
    pub assignments: &'a [DisciplineAssignment],
    pub genders: &'a [GenderRecord],
    pub focal: CountryCode,
    pub nmr: NmrConfig,
    pub reference_year: i32,
}

pub fn build_bundle(m: &MetricsInputs<'_>, manifest_hash: &str) -> Result<ReportBundle> {
    let (flows_in, flows_out) = aggregate_flows(m.events, m.focal, m.corpus.window);
    let nmr = nmr_series(m.events, m.corpus, m.focal, &m.nmr)?;
    let citations = citation_profiles(m.corpus, m.classes, m.assignments, m.reference_year)?;
    Ok(ReportBundle {
        manifest_hash: manifest_hash.to_owned(),
        mobility_table: mobility_table(m.classes),
        citation_stats: citation_stats(&citations.profiles),
        flows_in,
        flows_out,
        nmr,
        corridors: corridor_composition(m.classes, &citations.profiles),
        gender_ratios: gender_ratio_table(m.classes, m.assignments, m.genders),
        citation_profiles: citations.profiles,
    })
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub manifest: RunManifest,
    pub bundle: ReportBundle,
    pub report_files: Vec<PathBuf>,
    pub ingest: ParseReport,
    pub fill: FillReport,
    pub disambig: DisambigReport,
    /// Present when the corpus was synthesized.
    pub score: Option<ScoreCard>,
}

/// Run every stage and write the bundle into `out`.
pub fn run_pipeline(cfg: &PipelineConfig, out: &Path) -> Result<PipelineRun> {
    let paths = RunPaths::new(out);
    std::fs::create_dir_all(&paths.dir).map_err(|e| Error::io(&paths.dir, e))?;
    for name in [MANIFEST, STALE] {
        let p = out.join(name);
        if p.exists() {
            std::fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
        }
    }
    let result = run_stages(cfg, &paths);
    if let Err(e) = &result {
        let p = out.join(STALE);
        std::fs::write(&p, format!("{e}\n")).map_err(|io| Error::io(&p, io))?;
    }
    result
}

fn run_stages(cfg: &PipelineConfig, paths: &RunPaths) -> Result<PipelineRun> {
    cfg.check()?;
    let ingest_cfg = cfg.effective_ingest();
    let f = |n: &str| paths.file(n);

    let truth = stage("synth", || {
        let Some(spec) = &cfg.synth else {
            return Ok(None);
        };
        let (corpus, truth) = generate_corpus(spec)?;
        write_corpus(&corpus, &f("synth_corpus.csv"))?;
        truth.save(&f("truth.json"))?;
        Ok(Some(truth))
    })?;
    let input = match &cfg.input {
        Some(p) => cfg.resolve(p),
        None => f("synth_corpus.csv"),
    };

    let (fingerprint, ingest_report) = stage("ingest", || {
        let (corpus, report) = parse_corpus(&input, &ingest_cfg)?;
        write_corpus(&corpus, &f("corpus.csv"))?;
        write_json(&f("ingest_report.json"), &report)?;
        Ok((corpus_fingerprint(&corpus)?, report))
    })?;

    let fill = stage("fill-country", || {
        let corpus = read_intermediate_corpus(&f("corpus.csv"), &ingest_cfg)?;
        let pretrained = cfg.country_model.as_ref().map(|p| cfg.resolve(p));
        let (filled, report) = fill_stage(
            &corpus,
            &cfg.country,
            pretrained.as_deref(),
            Some(&f("country_model.bin")),
        )?;
        write_corpus(&filled, &f("corpus_filled.csv"))?;
        write_json(&f("fill_report.json"), &report)?;
        Ok(report)
    })?;

    let dis = stage("disambiguate", || {
        let corpus = read_intermediate_corpus(&f("corpus_filled.csv"), &ingest_cfg)?;
        let (split, report) = disambiguate(&corpus, &cfg.disambig_config()?)?;
        write_corpus(&split, &f("corpus_disamb.csv"))?;
        write_json(&f("disambig_report.json"), &report)?;
        Ok(report)
    })?;

    stage("mobility", || {
        let corpus = read_intermediate_corpus(&f("corpus_disamb.csv"), &ingest_cfg)?;
        let m = analyze_corpus(&corpus, cfg.focal);
        write_events_csv(&m.events, create(&f("events.csv"))?)?;
        write_classes_csv(&m.classes, create(&f("classes.csv"))?)
    })?;

    stage("classify", || {
        let corpus = read_intermediate_corpus(&f("corpus_disamb.csv"), &ingest_cfg)?;
        let (assignments, genders) = classify_stage(
            &corpus,
            cfg.discipline_threshold,
            &cfg.name_table()?,
            cfg.gender,
        );
        write_assignments_csv(&assignments, create(&f("assignments.csv"))?)?;
        write_genders_csv(&genders, create(&f("genders.csv"))?)
    })?;

    stage("report", || {
        let corpus = read_intermediate_corpus(&f("corpus_disamb.csv"), &ingest_cfg)?;
        let events = read_events(&f("events.csv"))?;
        let classes = read_classes(&f("classes.csv"))?;
        let assignments = read_assignments(&f("assignments.csv"))?;
        let genders = read_genders(&f("genders.csv"))?;

        let score = match &truth {
            Some(t) => {
                let card = score_synthetic(t, &fingerprint, &corpus, &events, &classes)?;
                write_json(&f("score.json"), &card)?;
                Some(card)
            }
            None => None,
        };

        let reference_year = cfg.reference_year.unwrap_or(corpus.window.end_year);
        let mut manifest = manifest_for(cfg, &fingerprint, reference_year)?;
        let inputs = MetricsInputs {
            corpus: &corpus,
            events: &events,
            classes: &classes,
            assignments: &assignments,
            genders: &genders,
            focal: cfg.focal,
            nmr: cfg.nmr,
            reference_year,
        };
        let bundle = build_bundle(&inputs, &manifest.run_manifest_sha256)?;
        let report_files = emit_reports(&bundle, &paths.out)?;
        for p in &report_files {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            manifest.files.insert(name, sha256_file(p)?);
        }
        write_json(&paths.out.join(MANIFEST), &manifest)?;
        Ok(PipelineRun {
            manifest,
            bundle,
            report_files,
            ingest: ingest_report,
            fill,
            disambig: dis,
            score,
        })
    })
}

fn score_synthetic(
    truth: &GroundTruth,
    fingerprint: &str,
    corpus: &Corpus,
    events: &[MigrationEvent],
    classes: &[MobilityClassification],
) -> Result<ScoreCard> {
    score_pipeline(
        truth,
        PipelineOutputs {
            run_id: fingerprint,
            corpus,
            events,
            classes,
        },
    )
}

/// Manifest with every field except the report file hashes.
pub fn manifest_for(
    cfg: &PipelineConfig,
    corpus_fingerprint: &str,
    reference_year: i32,
) -> Result<RunManifest> {
    let config_sha256 = sha256_hex(&serde_json::to_vec(cfg)?);
    let mut inputs = BTreeMap::new();
    inputs.insert("corpus".to_owned(), corpus_fingerprint.to_owned());
    for (role, path) in [
        ("names", &cfg.names),
        ("weights", &cfg.weights),
        ("country_model", &cfg.country_model),
    ] {
        if let Some(p) = path {
            inputs.insert(role.to_owned(), sha256_file(&cfg.resolve(p))?);
        }
    }
    let mut seeds = BTreeMap::new();
    seeds.insert("country_model".to_owned(), cfg.country.seed);
    if let Some(s) = &cfg.synth {
        seeds.insert("synth".to_owned(), s.seed);
    }
    let tool_version = env!("CARGO_PKG_VERSION").to_owned();
    let run_manifest_sha256 = sha256_hex(&serde_json::to_vec(&(
        &tool_version,
        &config_sha256,
        &inputs,
        &seeds,
        cfg.focal,
        reference_year,
    ))?);
    Ok(RunManifest {
        run_manifest_sha256,
        tool_version,
        config_sha256,
        inputs,
        seeds,
        focal: cfg.focal,
        reference_year,
        files: BTreeMap::new(),
    })
}
