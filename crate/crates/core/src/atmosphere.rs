//! Tabulated atmospheric attenuation.
//!
//! Tables are two-column CSV files:
//!
//! ```text
//! # free-text provenance, kept as metadata
//! frequency_ghz,attenuation_db_per_km
//! 5,0.009
//! ```
//!
//! Lookups interpolate linearly between rows and refuse to extrapolate:
//! resonance lines make extrapolated values meaningless.

use std::path::Path;

use crate::error::{invalid, Error, Result};

/// Environment variable that replaces the bundled table.
pub const ATMOS_PATH_ENV: &str = "CRYOLINK_ATMOS_PATH";

const HEADER: [&str; 2] = ["frequency_ghz", "attenuation_db_per_km"];
const BUNDLED: &str = include_str!("../data/atmosphere_default.csv");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphereRow {
    pub frequency_ghz: f64,
    pub attenuation_db_per_km: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtmosphereTable {
    rows: Vec<AtmosphereRow>,
    metadata: Vec<String>,
}

impl AtmosphereTable {
    pub fn new(rows: Vec<AtmosphereRow>, metadata: Vec<String>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("atmosphere table has no rows"));
        }
        for (i, r) in rows.iter().enumerate() {
            if !r.frequency_ghz.is_finite() || r.frequency_ghz < 0.0 {
                return Err(invalid(format!("row {i}: bad frequency {}", r.frequency_ghz)));
            }
            if !(r.attenuation_db_per_km >= 0.0) || !r.attenuation_db_per_km.is_finite() {
                return Err(invalid(format!("row {i}: attenuation must be >= 0 dB/km")));
            }
            if i > 0 && r.frequency_ghz <= rows[i - 1].frequency_ghz {
                return Err(invalid(format!("row {i}: frequencies must be strictly increasing")));
            }
        }
        Ok(Self { rows, metadata })
    }

    /// Parse CSV text. `#` lines are comments and are kept as metadata.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let metadata = text
            .lines()
            .filter_map(|l| l.trim_start().strip_prefix('#'))
            .map(|l| l.trim().to_string())
            .collect();
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != HEADER {
            return Err(invalid(format!(
                "atmosphere header must be `{}`, got `{}`",
                HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let parse = |k: usize| -> Result<f64> {
                record[k]
                    .parse::<f64>()
                    .map_err(|e| invalid(format!("data row {}: column {}: {e}", i + 1, HEADER[k])))
            };
            rows.push(AtmosphereRow {
                frequency_ghz: parse(0)?,
                attenuation_db_per_km: parse(1)?,
            });
        }
        Self::new(rows, metadata)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn bundled() -> Self {
        Self::from_csv_str(BUNDLED).expect("bundled atmosphere table is valid")
    }

    /// The table named by [`ATMOS_PATH_ENV`] if set, else the bundled one.
    pub fn resolve() -> Result<Self> {
        match std::env::var_os(ATMOS_PATH_ENV) {
            Some(p) if !p.is_empty() => Self::from_path(p),
            _ => Ok(Self::bundled()),
        }
    }

    pub fn rows(&self) -> &[AtmosphereRow] {
        &self.rows
    }

    pub fn metadata(&self) -> &[String] {
        &self.metadata
    }

    pub fn range_ghz(&self) -> (f64, f64) {
        (self.rows[0].frequency_ghz, self.rows[self.rows.len() - 1].frequency_ghz)
    }

    pub fn attenuation_db_per_km(&self, frequency_ghz: f64) -> Result<f64> {
        let (lo, hi) = self.range_ghz();
        if !(frequency_ghz >= lo && frequency_ghz <= hi) {
            return Err(Error::OutOfTableRange {
                frequency_ghz,
                min_ghz: lo,
                max_ghz: hi,
            });
        }
        let upper = self.rows.partition_point(|r| r.frequency_ghz < frequency_ghz);
        let b = self.rows[upper];
        if b.frequency_ghz == frequency_ghz || upper == 0 {
            return Ok(b.attenuation_db_per_km);
        }
        let a = self.rows[upper - 1];
        let t = (frequency_ghz - a.frequency_ghz) / (b.frequency_ghz - a.frequency_ghz);
        Ok(a.attenuation_db_per_km + t * (b.attenuation_db_per_km - a.attenuation_db_per_km))
    }

    /// Rows with `min_ghz <= f <= max_ghz`, in table order.
    pub fn band(&self, min_ghz: f64, max_ghz: f64) -> Result<Vec<AtmosphereRow>> {
        if !(min_ghz <= max_ghz) {
            return Err(invalid(format!("empty band [{min_ghz}, {max_ghz}] GHz")));
        }
        let (lo, hi) = self.range_ghz();
        if min_ghz < lo || max_ghz > hi {
            return Err(Error::OutOfTableRange {
                frequency_ghz: if min_ghz < lo { min_ghz } else { max_ghz },
                min_ghz: lo,
                max_ghz: hi,
            });
        }
        let rows: Vec<_> = self
            .rows
            .iter()
            .copied()
            .filter(|r| r.frequency_ghz >= min_ghz && r.frequency_ghz <= max_ghz)
            .collect();
        if rows.is_empty() {
            return Err(invalid(format!("no table rows in [{min_ghz}, {max_ghz}] GHz")));
        }
        Ok(rows)
    }
}
