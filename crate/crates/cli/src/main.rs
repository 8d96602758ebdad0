use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scholmig::country_infer::{
    fill_missing_countries, train_country_model, CountryModel, TrainConfig,
};
use scholmig::disambig::{disambiguate, DisambigConfig, Linkage, ScoreTable};
use scholmig::ingest::{parse_corpus, write_corpus, Corpus, IngestConfig};
use scholmig::metrics::{aggregate_flows, citation_profiles, nmr_series, NmrConfig};
use scholmig::mobility::{analyze_corpus, write_classes_csv, write_events_csv};
use scholmig::report::{
    self, classify_stage, corridor_composition, read_assignments, read_classes, read_events,
    run_pipeline, sha256_file, sha256_hex, tables, PipelineConfig,
};
use scholmig::synthgen::{generate_corpus, SynthSpec};
use scholmig::taxonomy_gender::{
    assign_corpus, write_assignments_csv, write_genders_csv, GenderGates, NameGenderTable,
};
use scholmig::{CountryCode, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "scholmig",
    version,
    about = "Researcher migration analytics from authorship records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct IngestArgs {
    /// TOML file with `window`, `strict` and `snapshot_date`.
    #[arg(long = "ingest-config")]
    ingest_config: Option<PathBuf>,
    /// Abort on the first malformed row.
    #[arg(long)]
    strict: bool,
}

impl IngestArgs {
    fn config(&self) -> anyhow::Result<IngestConfig> {
        let mut cfg = match &self.ingest_config {
            Some(p) => IngestConfig::from_path(p)?,
            None => IngestConfig::default(),
        };
        cfg.strict |= self.strict;
        Ok(cfg)
    }

    fn read(&self, path: &Path) -> anyhow::Result<Corpus> {
        let (corpus, report) = parse_corpus(path, &self.config()?)?;
        if report.rejected > 0 {
            eprintln!(
                "{}: skipped {} malformed rows",
                path.display(),
                report.rejected
            );
        }
        Ok(corpus)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train the affiliation-to-country classifier.
    TrainCountry {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long = "learning-rate")]
        learning_rate: Option<f64>,
        #[arg(long = "batch-size")]
        batch_size: Option<usize>,
        #[arg(long)]
        stratify: bool,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Impute missing countries with a trained model.
    FillCountry {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Split suspicious author IDs into person clusters.
    Disambiguate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value = "average")]
        linkage: Linkage,
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Detect migration events and classify mobility types.
    Mobility {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "DE")]
        focal: CountryCode,
        /// Events and classes files, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        out: Vec<PathBuf>,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Assign disciplines and infer genders.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Name-gender table; the bundled table if omitted.
        #[arg(long)]
        names: Option<PathBuf>,
        /// Assignments and genders files, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        out: Vec<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        threshold: f64,
        #[arg(long = "p-min", default_value_t = 0.6)]
        p_min: f64,
        #[arg(long = "c-min", default_value_t = 5)]
        c_min: u64,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Flow matrices, net migration rates and citation tables.
    Metrics {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        classes: PathBuf,
        /// Discipline assignments; computed from the corpus if omitted.
        #[arg(long)]
        assignments: Option<PathBuf>,
        #[arg(long, default_value = "DE")]
        focal: CountryCode,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        #[arg(long = "reference-year")]
        reference_year: Option<i32>,
        #[arg(long = "trim-head", default_value_t = 2)]
        trim_head: i32,
        #[arg(long = "trim-tail", default_value_t = 3)]
        trim_tail: i32,
        #[arg(long, default_value_t = 2)]
        vicinity: i32,
        #[arg(long = "discipline-threshold", default_value_t = 1.0)]
        discipline_threshold: f64,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Generate a synthetic corpus with ground truth.
    Synth {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Overrides the seed of the spec.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every stage and write the report bundle.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(std::fs::write(path, s).map_err(|e| Error::io(path, e))?)
}

fn pair(out: &[PathBuf], what: &str) -> anyhow::Result<(PathBuf, PathBuf)> {
    match out {
        [a, b] => Ok((a.clone(), b.clone())),
        _ => Err(Error::Config(format!("--out takes two comma-separated paths: {what}")).into()),
    }
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::TrainCountry {
            input,
            out,
            seed,
            epochs,
            hidden,
            dim,
            learning_rate,
            batch_size,
            stratify,
            ingest,
        } => {
            let corpus = ingest.read(&input)?;
            let d = TrainConfig::default();
            let cfg = TrainConfig {
                seed,
                epochs: epochs.unwrap_or(d.epochs),
                hidden: hidden.unwrap_or(d.hidden),
                dim: dim.unwrap_or(d.dim),
                learning_rate: learning_rate.unwrap_or(d.learning_rate),
                batch_size: batch_size.unwrap_or(d.batch_size),
                stratify,
                ..d
            };
            let model = train_country_model(&corpus, &cfg)?;
            model.save(&out)?;
            let meta = &model.training_meta;
            eprintln!(
                "trained on {} records, {} classes, held-out accuracy {:.4}",
                meta.n_train,
                model.classes.len(),
                meta.held_out_accuracy
            );
        }
        Command::FillCountry {
            input,
            model,
            out,
            report,
            ingest,
        } => {
            let corpus = ingest.read(&input)?;
            let model = CountryModel::load(&model)?;
            let (filled, fill) = fill_missing_countries(&corpus, &model);
            write_corpus(&filled, &out)?;
            if let Some(p) = report {
                write_json(&p, &fill)?;
            }
            eprintln!(
                "filled {} of {} missing countries",
                fill.filled,
                fill.filled + fill.unfillable
            );
        }
        Command::Disambiguate {
            input,
            out,
            weights,
            threshold,
            linkage,
            report,
            ingest,
        } => {
            let corpus = ingest.read(&input)?;
            let cfg = DisambigConfig {
                merge_threshold: threshold,
                linkage,
                weights: match weights {
                    Some(p) => ScoreTable::from_path(&p)?,
                    None => ScoreTable::default(),
                },
                ..DisambigConfig::default()
            };
            let (split, rep) = disambiguate(&corpus, &cfg)?;
            write_corpus(&split, &out)?;
            if let Some(p) = report {
                write_json(&p, &rep)?;
            }
            eprintln!(
                "{} suspicious of {} author IDs, {} revised IDs",
                rep.n_suspicious, rep.n_author_ids, rep.n_revised_ids
            );
        }
        Command::Mobility {
            input,
            focal,
            out,
            ingest,
        } => {
            let (events_out, classes_out) = pair(&out, "events.csv,classes.csv")?;
            let corpus = ingest.read(&input)?;
            let m = analyze_corpus(&corpus, focal);
            write_events_csv(&m.events, create(&events_out)?)?;
            write_classes_csv(&m.classes, create(&classes_out)?)?;
            eprintln!(
                "{} events, {} classified researchers",
                m.events.len(),
                m.classes.len()
            );
        }
        Command::Classify {
            input,
            names,
            out,
            threshold,
            p_min,
            c_min,
            ingest,
        } => {
            let (a_out, g_out) = pair(&out, "assignments.csv,genders.csv")?;
            let corpus = ingest.read(&input)?;
            let table = match names {
                Some(p) => NameGenderTable::from_path(&p)?,
                None => NameGenderTable::bundled(),
            };
            let (assignments, genders) =
                classify_stage(&corpus, threshold, &table, GenderGates { p_min, c_min });
            write_assignments_csv(&assignments, create(&a_out)?)?;
            write_genders_csv(&genders, create(&g_out)?)?;
        }
        Command::Metrics {
            input,
            events,
            classes,
            assignments,
            focal,
            out_dir,
            reference_year,
            trim_head,
            trim_tail,
            vicinity,
            discipline_threshold,
            ingest,
        } => {
            let corpus = ingest.read(&input)?;
            let ev = read_events(&events)?;
            let cl = read_classes(&classes)?;
            let asg = match &assignments {
                Some(p) => read_assignments(p)?,
                None => assign_corpus(&corpus, discipline_threshold).0,
            };
            let nmr = NmrConfig {
                head_trim: trim_head,
                tail_trim: trim_tail,
                vicinity,
            };
            let reference_year = reference_year.unwrap_or(corpus.window.end_year);

            let mut inputs = vec![
                sha256_file(&input)?,
                sha256_file(&events)?,
                sha256_file(&classes)?,
            ];
            if let Some(p) = &assignments {
                inputs.push(sha256_file(p)?);
            }
            let hash = sha256_hex(
                serde_json::to_string(&(
                    "metrics",
                    env!("CARGO_PKG_VERSION"),
                    &inputs,
                    focal,
                    reference_year,
                    nmr,
                    discipline_threshold,
                ))?
                .as_bytes(),
            );

            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            let p = |n: &str| out_dir.join(n);
            let (flows_in, flows_out) = aggregate_flows(&ev, focal, corpus.window);
            let series = nmr_series(&ev, &corpus, focal, &nmr)?;
            let profiles = citation_profiles(&corpus, &cl, &asg, reference_year)?.profiles;
            tables::write_flows(&p(report::FLOWS_IN), &hash, &flows_in)?;
            tables::write_flows(&p(report::FLOWS_OUT), &hash, &flows_out)?;
            tables::write_nmr(&p(report::NMR), &hash, &series)?;
            tables::write_citation_profiles(&p(report::CITATION_PROFILES), &hash, &profiles)?;
            tables::write_corridors(
                &p(report::CORRIDORS),
                &hash,
                &corridor_composition(&cl, &profiles),
            )?;
        }
        Command::Synth {
            spec,
            out,
            truth,
            seed,
        } => {
            let mut spec = match spec {
                Some(p) => SynthSpec::from_path(&p)?,
                None => SynthSpec::default(),
            };
            if let Some(s) = seed {
                spec.seed = s;
            }
            let (corpus, gt) = generate_corpus(&spec)?;
            write_corpus(&corpus, &out)?;
            gt.save(&truth)?;
            eprintln!(
                "{} records, {} persons, {} true events",
                corpus.len(),
                gt.persons.len(),
                gt.n_events()
            );
        }
        Command::Pipeline { config, out_dir } => {
            let cfg = PipelineConfig::from_path(&config)?;
            let run = run_pipeline(&cfg, &out_dir)?;
            eprintln!(
                "run {} wrote {} report files to {}",
                run.manifest.run_manifest_sha256,
                run.report_files.len(),
                out_dir.display()
            );
            if let Some(s) = &run.score {
                eprintln!(
                    "event recall {:.4}, precision {:.4}, mobility accuracy {:.4}",
                    s.event_recall, s.event_precision, s.mobility_accuracy
                );
            }
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let Some(mut e) = err.downcast_ref::<Error>() else {
        return if err.downcast_ref::<std::io::Error>().is_some() {
            EXIT_DATA
        } else {
            EXIT_INTERNAL
        };
    };
    while let Error::Stage { source, .. } = e {
        e = source;
    }
    match e {
        Error::Config(_) | Error::InvalidSpec(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match std::panic::catch_unwind(|| run(cli.command)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
