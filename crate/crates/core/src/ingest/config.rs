use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::record::YearWindow;
use crate::error::{Error, Result};

/// Ingest settings, read from a TOML key-value file:
///
/// ```toml
/// strict = false
/// snapshot_date = "2020-04-01"
/// window.start_year = 1996
/// window.end_year = 2020
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub window: YearWindow,
    /// Abort on the first malformed row instead of skipping and counting.
    pub strict: bool,
    pub snapshot_date: NaiveDate,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            window: YearWindow::default(),
            strict: false,
            snapshot_date: NaiveDate::from_ymd_opt(2020, 4, 1).expect("valid date"),
        }
    }
}

impl IngestConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: IngestConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&s)
    }

    pub fn check(&self) -> Result<()> {
        if self.window.start_year > self.window.end_year {
            return Err(Error::Config(format!(
                "window.start_year {} is after window.end_year {}",
                self.window.start_year, self.window.end_year
            )));
        }
        Ok(())
    }
}
