//! Reconstruct international migration histories of researchers from
//! longitudinal authorship records.
//!
//! The pipeline runs ingest, country imputation for records without an
//! affiliation country, author-ID disambiguation, per-year mode-country
//! profiles and migration events, mobility classification relative to a
//! focal country, and finally flow, net-migration-rate, citation, discipline
//! and gender metrics. [`synthgen`] produces corpora with planted ground
//! truth for checking each stage.

pub mod country;
pub mod country_infer;
pub mod disambig;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod mobility;
pub mod report;
pub mod rng;
pub mod synthgen;
pub mod taxonomy_gender;

pub use country::CountryCode;
pub use error::{Error, Result};
