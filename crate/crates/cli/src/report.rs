//! The sweep report and its CSV form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Bumped whenever a column is added, removed, or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// One `(regime, n, seed)` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub schema_version: u32,
    pub regime: String,
    pub n: usize,
    pub seed: u64,
    pub eps: f64,
    pub lambda: f64,
    pub method: String,
    pub energy: f64,
    pub gtv_of_solution: f64,
    pub empirical_risk: f64,
    /// Fraction of nodes where the solution equals the label.
    pub label_agreement: f64,
    pub bayes_agreement: f64,
    pub test_risk: f64,
    pub test_risk_ci: f64,
    pub bayes_risk: f64,
    pub excess_risk: f64,
    pub tl1_proxy: f64,
    pub certificate: bool,
    pub certificate_margin: f64,
    pub components: usize,
    pub converged: bool,
    /// Fraction of nodes labeled 1 by the solution.
    pub solution_ones: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub regime: String,
    pub n: usize,
    pub seed: u64,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegimeReport {
    pub rows: Vec<RegimeRow>,
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::Io { path: "<csv>".into(), source: io },
        other => CliError::Report(format!("{other:?}")),
    }
}

impl RegimeReport {
    /// Regime tags in order of first appearance.
    pub fn regimes(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.regime) {
                out.push(r.regime.clone());
            }
        }
        out
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        for row in &self.rows {
            writer.serialize(row).map_err(csv_err)?;
        }
        writer.flush().map_err(|e| CliError::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let rows: Vec<RegimeRow> = reader.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)?;
        if let Some(bad) = rows.iter().find(|r| r.schema_version != SCHEMA_VERSION) {
            return Err(CliError::Report(format!(
                "schema version {} is not supported (expected {SCHEMA_VERSION})",
                bad.schema_version
            )));
        }
        Ok(Self { rows })
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| with_path(e, path))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file)).map_err(|e| with_path(e, path))
    }
}

fn with_path(e: CliError, path: &Path) -> CliError {
    match e {
        CliError::Io { source, .. } => CliError::io(path, source),
        other => other,
    }
}

pub fn save_timings(timings: &[Timing], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut writer = csv::Writer::from_writer(std::io::BufWriter::new(file));
    for t in timings {
        writer.serialize(t).map_err(|e| with_path(csv_err(e), path))?;
    }
    writer.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(regime: &str, n: usize) -> RegimeRow {
        RegimeRow {
            schema_version: SCHEMA_VERSION,
            regime: regime.into(),
            n,
            seed: 3,
            eps: 0.1,
            lambda: 0.2,
            method: "mincut".into(),
            energy: 0.4,
            gtv_of_solution: 1.25,
            empirical_risk: 0.3,
            label_agreement: 0.7,
            bayes_agreement: 0.9,
            test_risk: 0.47,
            test_risk_ci: 0.01,
            bayes_risk: 0.45,
            excess_risk: 0.02,
            tl1_proxy: 0.1,
            certificate: false,
            certificate_margin: -3.5,
            components: 1,
            converged: true,
            solution_ones: 0.5,
        }
    }

    #[test]
    fn csv_round_trip() {
        let report = RegimeReport { rows: vec![row("consistent", 100), row("underfit", 200)] };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("schema_version,regime,n,seed,"));
        assert_eq!(RegimeReport::read_csv(buf.as_slice()).unwrap(), report);
        assert_eq!(report.regimes(), vec!["consistent".to_string(), "underfit".to_string()]);
    }

    #[test]
    fn rejects_other_schema_versions() {
        let mut r = row("fixed", 10);
        r.schema_version = SCHEMA_VERSION + 1;
        let mut buf = Vec::new();
        RegimeReport { rows: vec![r] }.write_csv(&mut buf).unwrap();
        assert!(matches!(RegimeReport::read_csv(buf.as_slice()), Err(CliError::Report(_))));
    }
}
