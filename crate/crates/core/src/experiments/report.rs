use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::classical::{ChainSpec, ClassicalSolution};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Measured quantities at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub value: f64,
    pub quantities: BTreeMap<String, f64>,
}

impl Row {
    pub fn new(value: f64) -> Self {
        Self { value, quantities: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, x: f64) -> Self {
        self.quantities.insert(name.to_string(), x);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.quantities.get(name).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub value: f64,
    /// Root-mean-square residual of the fit, zero for exact rules.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub wall_clock_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub sweep_param: String,
    pub rows: Vec<Row>,
    pub fits: BTreeMap<String, Fit>,
    pub flags: Vec<String>,
    pub metadata: Metadata,
}

impl EntanglementReport {
    pub fn column(&self, name: &str) -> Vec<f64> {
        self.rows.iter().map(|r| r.get(name).unwrap_or(f64::NAN)).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn fit(&self, name: &str) -> Option<f64> {
        self.fits.get(name).map(|f| f.value)
    }

    /// The report with timing stripped, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.metadata.wall_clock_seconds = 0.0;
        r.metadata.threads = 0;
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported report schema {}", r.schema_version)));
        }
        Ok(r)
    }

    /// Long-format CSV: `sweep_param,value,quantity,measurement,config_hash`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["sweep_param", "value", "quantity", "measurement", "config_hash"]).map_err(io)?;
        for row in &self.rows {
            for (name, x) in &row.quantities {
                w.write_record([
                    self.sweep_param.clone(),
                    format!("{:?}", row.value),
                    name.clone(),
                    format!("{x:?}"),
                    self.config_hash.clone(),
                ])
                .map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// A relaxed background together with its chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub chain: ChainSpec,
    pub solution: ClassicalSolution,
}

impl SolutionRecord {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{Boundary, Sector};

    #[test]
    fn solution_round_trip_is_bit_exact() {
        let phi: Vec<f64> =
            (0..50).map(|i| (i as f64 * 0.37).sin() * std::f64::consts::PI + 1e-17 * i as f64).collect();
        let rec = SolutionRecord {
            chain: ChainSpec::new(50, 1234.5678, Boundary::Driven { torque: 0.1 + 0.2 }).unwrap(),
            solution: ClassicalSolution {
                phi,
                sector: Sector::SingleSoliton,
                energy: 1.0 / 3.0,
                centers: vec![25.123456789],
            },
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sol.json");
        rec.save(&path).unwrap();
        let back = SolutionRecord::load(&path).unwrap();
        assert_eq!(back, rec);
        for (a, b) in back.solution.phi.iter().zip(&rec.solution.phi) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
