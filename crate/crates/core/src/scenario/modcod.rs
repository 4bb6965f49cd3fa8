//! ModCod tables: ascending `(snr_db, spectral_efficiency)` rows read from a
//! two-column CSV with header `snr_db,spectral_efficiency`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModCod {
    /// Minimum SINR at which the scheme decodes, dB.
    pub snr_db: f64,
    /// bit/s/Hz.
    pub spectral_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModCodTable {
    rows: Vec<ModCod>,
}

impl ModCodTable {
    pub fn new(rows: Vec<ModCod>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::validation("modcod", "table has no rows"));
        }
        for (i, r) in rows.iter().enumerate() {
            if !r.snr_db.is_finite() || !r.spectral_efficiency.is_finite() || r.spectral_efficiency <= 0.0 {
                return Err(Error::validation(format!("modcod row {}", i + 1), "values must be finite, efficiency positive"));
            }
        }
        for (i, w) in rows.windows(2).enumerate() {
            if w[1].snr_db <= w[0].snr_db {
                return Err(Error::validation(format!("modcod row {}", i + 2), "snr_db must ascend strictly"));
            }
            if w[1].spectral_efficiency <= w[0].spectral_efficiency {
                return Err(Error::validation(
                    format!("modcod row {}", i + 2),
                    "spectral_efficiency must ascend strictly",
                ));
            }
        }
        Ok(Self { rows })
    }

    pub fn from_csv_str(source: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::parse("modcod table", "header", e))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["snr_db", "spectral_efficiency"] {
            return Err(Error::parse(
                "modcod table",
                "header",
                format!("expected `snr_db,spectral_efficiency`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            ));
        }
        let mut rows = Vec::new();
        for (i, record) in reader.deserialize::<ModCod>().enumerate() {
            let row = record.map_err(|e| Error::parse("modcod table", format!("row {}", i + 1), e))?;
            rows.push(row);
        }
        Self::new(rows)
    }

    pub fn rows(&self) -> &[ModCod] {
        &self.rows
    }

    pub fn lowest_threshold_db(&self) -> f64 {
        self.rows[0].snr_db
    }

    /// Efficiency of the highest row whose threshold is `≤ sinr_db`; 0 when
    /// below every threshold (outage) or for NaN.
    pub fn efficiency_db(&self, sinr_db: f64) -> f64 {
        let n = self.rows.partition_point(|r| r.snr_db <= sinr_db);
        if n == 0 {
            0.0
        } else {
            self.rows[n - 1].spectral_efficiency
        }
    }

    pub fn efficiency_linear(&self, sinr: f64) -> f64 {
        self.efficiency_db(10.0 * sinr.log10())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    #[test]
    fn bundled_table_parses() {
        let t = ModCodTable::from_csv_str(data::MODCOD_DVBS2X).unwrap();
        assert!(t.rows().len() > 30);
        assert_eq!(t.efficiency_db(-10.0), 0.0);
        assert!(t.efficiency_db(30.0) > 5.0);
    }

    #[test]
    fn thresholds_are_inclusive() {
        let t = ModCodTable::from_csv_str("snr_db,spectral_efficiency\n0,1\n3,2\n").unwrap();
        assert_eq!(t.efficiency_db(3.0), 2.0);
        assert_eq!(t.efficiency_db(2.999), 1.0);
        assert_eq!(t.efficiency_db(-0.1), 0.0);
        assert_eq!(t.efficiency_db(f64::NAN), 0.0);
        assert_eq!(t.efficiency_linear(0.0), 0.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(ModCodTable::from_csv_str("snr,eff\n0,1\n").is_err());
        assert!(ModCodTable::from_csv_str("snr_db,spectral_efficiency\n0,1\n0,2\n").is_err());
        assert!(ModCodTable::from_csv_str("snr_db,spectral_efficiency\n0,2\n1,1\n").is_err());
        assert!(ModCodTable::from_csv_str("snr_db,spectral_efficiency\n").is_err());
        match ModCodTable::from_csv_str("snr_db,spectral_efficiency\n0,1\nx,2\n").unwrap_err() {
            Error::Parse { field, .. } => assert_eq!(field, "row 2"),
            e => panic!("{e}"),
        }
    }
}
