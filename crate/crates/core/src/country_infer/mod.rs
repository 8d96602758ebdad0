//! Affiliation-string country classifier and missing-country imputation.

mod format;
mod network;
mod tokenize;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use format::{decode as decode_model, encode as encode_model, MAGIC, VERSION};
pub use network::{Gradients, Network};
pub use tokenize::{
    feature_index, fnv1a64, hash_features, tokenize_affiliation, tokens, SparseFeatures,
    TokenizedAffiliation,
};

use crate::country::CountryCode;
use crate::error::{Error, Result};
use crate::ingest::{AuthorshipRecord, Corpus};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub train_fraction: f64,
    pub max_train_records: usize,
    pub min_labeled: usize,
    /// Sample the training pool round-robin across countries instead of
    /// uniformly when the corpus exceeds `max_train_records`.
    pub stratify: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 1 << 16,
            hidden: 64,
            epochs: 5,
            batch_size: 256,
            learning_rate: 0.1,
            seed: 1,
            train_fraction: 0.8,
            max_train_records: 1_000_000,
            min_labeled: 20,
            stratify: false,
        }
    }
}

impl TrainConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("train config: {m}")));
        if !(1..=format::MAX_DIM).contains(&self.dim) {
            return bad("dim out of range");
        }
        if !(1..=format::MAX_HIDDEN).contains(&self.hidden) {
            return bad("hidden out of range");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train_fraction must lie strictly between 0 and 1");
        }
        if self.max_train_records < 2 {
            return bad("max_train_records must be at least 2");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingMeta {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub train_fraction: f64,
    pub stratify: bool,
    pub n_train: usize,
    pub held_out_accuracy: f64,
    /// Mean training cross-entropy after each epoch.
    pub epoch_losses: Vec<f64>,
    pub held_out_ids: Vec<String>,
}

impl TrainingMeta {
    pub(crate) fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.held_out_accuracy) {
            return Err(Error::Model(format!(
                "held-out accuracy {} outside [0, 1]",
                self.held_out_accuracy
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryModel {
    pub classes: Vec<CountryCode>,
    pub network: Network,
    pub training_meta: TrainingMeta,
}

impl CountryModel {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        encode_model(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        decode_model(bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn features(&self, text: &str) -> SparseFeatures {
        hash_features(&tokens(text), self.network.dim)
    }

    fn predict_features(&self, x: &SparseFeatures) -> (usize, f64) {
        let p = self.network.probabilities(x);
        let mut best = 0;
        for (c, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = c;
            }
        }
        (best, p[best])
    }
}

/// Most probable country for `text` and its softmax probability. Ties go
/// to the earliest class.
pub fn predict_country(model: &CountryModel, text: &str) -> (CountryCode, f64) {
    let (c, p) = model.predict_features(&model.features(text));
    (model.classes[c], p)
}

/// Fraction of `records` whose predicted country equals their recorded
/// one. Records without a country are ignored.
pub fn accuracy(model: &CountryModel, records: &[&AuthorshipRecord]) -> f64 {
    let hits: Vec<Option<bool>> = records
        .par_iter()
        .map(|r| {
            r.country
                .map(|c| predict_country(model, &r.affiliation_text).0 == c)
        })
        .collect();
    let judged = hits.iter().flatten().count();
    if judged == 0 {
        return 0.0;
    }
    hits.iter().flatten().filter(|h| **h).count() as f64 / judged as f64
}

/// Records named in the model's held-out list, in list order.
pub fn held_out_records<'a>(
    model: &CountryModel,
    corpus: &'a Corpus,
) -> Result<Vec<&'a AuthorshipRecord>> {
    let by_id: HashMap<&str, &AuthorshipRecord> = corpus
        .records
        .iter()
        .map(|r| (r.record_id.as_str(), r))
        .collect();
    model
        .training_meta
        .held_out_ids
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::UnknownRecord(id.clone()))
        })
        .collect()
}

fn sample_pool<'a>(
    labeled: Vec<&'a AuthorshipRecord>,
    cfg: &TrainConfig,
    rng: &mut SeededRng,
) -> Vec<&'a AuthorshipRecord> {
    if labeled.len() <= cfg.max_train_records {
        return labeled;
    }
    if !cfg.stratify {
        let mut pool = labeled;
        rng.shuffle(&mut pool);
        pool.truncate(cfg.max_train_records);
        return pool;
    }
    let mut by_country: BTreeMap<CountryCode, Vec<&AuthorshipRecord>> = BTreeMap::new();
    for r in labeled {
        by_country.entry(r.country.unwrap()).or_default().push(r);
    }
    let mut queues: Vec<Vec<&AuthorshipRecord>> = by_country.into_values().collect();
    for q in &mut queues {
        rng.shuffle(q);
        q.reverse();
    }
    let mut pool = Vec::with_capacity(cfg.max_train_records);
    while pool.len() < cfg.max_train_records {
        for q in &mut queues {
            if pool.len() == cfg.max_train_records {
                break;
            }
            if let Some(r) = q.pop() {
                pool.push(r);
            }
        }
    }
    pool
}

/// Train on a seeded split of the records that carry a country. Imputed
/// countries are never used as labels.
pub fn train_country_model(corpus: &Corpus, cfg: &TrainConfig) -> Result<CountryModel> {
    cfg.check()?;
    let labeled: Vec<&AuthorshipRecord> = corpus
        .records
        .iter()
        .filter(|r| r.country.is_some() && !r.country_imputed)
        .collect();
    if labeled.len() < cfg.min_labeled.max(2) {
        return Err(Error::InsufficientData(format!(
            "{} records with a country, need at least {}",
            labeled.len(),
            cfg.min_labeled.max(2)
        )));
    }
    let mut rng = SeededRng::new(cfg.seed);
    let mut pool = sample_pool(labeled, cfg, &mut rng);
    let classes: Vec<CountryCode> = pool
        .iter()
        .filter_map(|r| r.country)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if classes.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "training needs at least two countries, found {}",
            classes.len()
        )));
    }
    rng.shuffle(&mut pool);
    let n_train =
        ((pool.len() as f64 * cfg.train_fraction).round() as usize).clamp(1, pool.len() - 1);
    let (train, held_out) = pool.split_at(n_train);

    let class_index: HashMap<CountryCode, usize> =
        classes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let examples: Vec<(SparseFeatures, usize)> = train
        .par_iter()
        .map(|r| {
            (
                hash_features(&tokens(&r.affiliation_text), cfg.dim),
                class_index[&r.country.unwrap()],
            )
        })
        .collect();

    let mut network = Network::init(cfg.dim, cfg.hidden, classes.len(), &mut rng);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&SparseFeatures, usize)> = chunk
                .iter()
                .map(|&i| (&examples[i].0, examples[i].1))
                .collect();
            let (_, g) = network.loss_and_gradients(&batch);
            network.apply(&g, cfg.learning_rate);
        }
        epoch_losses.push(training_loss(&network, &examples));
    }

    let mut model = CountryModel {
        classes,
        network,
        training_meta: TrainingMeta {
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            learning_rate: cfg.learning_rate,
            seed: cfg.seed,
            train_fraction: cfg.train_fraction,
            stratify: cfg.stratify,
            n_train,
            held_out_accuracy: 0.0,
            epoch_losses,
            held_out_ids: held_out.iter().map(|r| r.record_id.clone()).collect(),
        },
    };
    model.training_meta.held_out_accuracy = accuracy(&model, held_out);
    Ok(model)
}

/// Mean cross-entropy of `network` over `examples`.
pub fn training_loss(network: &Network, examples: &[(SparseFeatures, usize)]) -> f64 {
    let losses: Vec<f64> = examples
        .par_chunks(4096)
        .map(|chunk| {
            let batch: Vec<(&SparseFeatures, usize)> = chunk.iter().map(|(x, y)| (x, *y)).collect();
            network.loss(&batch) * chunk.len() as f64
        })
        .collect();
    losses.iter().sum::<f64>() / examples.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputation {
    pub record_id: String,
    pub country: CountryCode,
    pub confidence: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FillReport {
    pub n_records: usize,
    pub already_present: usize,
    pub filled: usize,
    /// Missing country and an affiliation without any token.
    pub unfillable: usize,
    pub imputations: Vec<Imputation>,
    pub unfillable_ids: Vec<String>,
}

/// Predict a country for every record that lacks one. Present countries
/// are never touched.
pub fn fill_missing_countries(corpus: &Corpus, model: &CountryModel) -> (Corpus, FillReport) {
    let mut out = corpus.clone();
    let predictions: Vec<Option<Option<(CountryCode, f64)>>> = corpus
        .records
        .par_iter()
        .map(|r| {
            if r.country.is_some() {
                return None;
            }
            let x = model.features(&r.affiliation_text);
            if x.is_empty() {
                return Some(None);
            }
            let (c, p) = model.predict_features(&x);
            Some(Some((model.classes[c], p)))
        })
        .collect();
    let mut report = FillReport {
        n_records: corpus.records.len(),
        ..FillReport::default()
    };
    for (r, pred) in out.records.iter_mut().zip(predictions) {
        match pred {
            None => report.already_present += 1,
            Some(None) => {
                report.unfillable += 1;
                report.unfillable_ids.push(r.record_id.clone());
            }
            Some(Some((country, confidence))) => {
                r.country = Some(country);
                r.country_imputed = true;
                report.filled += 1;
                report.imputations.push(Imputation {
                    record_id: r.record_id.clone(),
                    country,
                    confidence,
                });
            }
        }
    }
    (out, report)
}
