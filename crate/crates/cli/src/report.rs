//! Report rows and their CSV/JSON encodings.

use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize};

use crate::config::ExperimentConfig;

/// Bumped whenever the column set or meaning changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Constant-free check that held.
    Pass,
    /// Constant-free check that failed.
    Fail,
    /// Measurement with an unknown constant; recorded, never judged.
    Tracked,
    /// Hypothesis not met.
    Skipped,
    /// The computation itself was refused or failed.
    Error,
}

impl Status {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn is_failure(self) -> bool {
        matches!(self, Status::Fail | Status::Error)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub schema: u32,
    pub p: u32,
    pub n: u32,
    pub q: u32,
    pub d: usize,
    pub k: Option<u32>,
    pub set: String,
    pub check: String,
    pub hypothesis_met: bool,
    #[serde(deserialize_with = "nan_if_null")]
    pub lhs: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub rhs: f64,
    pub status: Status,
    #[serde(deserialize_with = "nan_if_null")]
    pub ratio: f64,
    pub seconds: f64,
    /// Error text or other detail; empty for ordinary rows.
    pub note: String,
}

/// JSON has no NaN; serde_json writes it as `null`, read back here as NaN.
fn nan_if_null<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl ReportRow {
    pub fn is_failure(&self) -> bool {
        self.status.is_failure()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub schema: u32,
    pub library: String,
    pub version: String,
    pub tolerance: f64,
    pub seeds: Vec<u64>,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub provenance: Provenance,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.is_failure())
    }

    /// 0 when every judged check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures().next().is_some() {
            1
        } else {
            0
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        if self.rows.is_empty() {
            w.write_record(CSV_COLUMNS)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn summary(&self) -> String {
        let count = |s: Status| self.rows.iter().filter(|r| r.status == s).count();
        format!(
            "{} rows: {} pass, {} fail, {} tracked, {} skipped, {} error",
            self.rows.len(),
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Tracked),
            count(Status::Skipped),
            count(Status::Error)
        )
    }
}

pub const CSV_COLUMNS: [&str; 15] = [
    "schema",
    "p",
    "n",
    "q",
    "d",
    "k",
    "set",
    "check",
    "hypothesis_met",
    "lhs",
    "rhs",
    "status",
    "ratio",
    "seconds",
    "note",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn row(status: Status) -> ReportRow {
        ReportRow {
            schema: SCHEMA_VERSION,
            p: 3,
            n: 1,
            q: 3,
            d: 2,
            k: None,
            set: "full".into(),
            check: "x".into(),
            hypothesis_met: true,
            lhs: 1.5,
            rhs: 2.0,
            status,
            ratio: 0.75,
            seconds: 0.0,
            note: String::new(),
        }
    }

    fn report(rows: Vec<ReportRow>) -> Report {
        let config = ExperimentConfig::acceptance();
        Report {
            provenance: Provenance {
                schema: SCHEMA_VERSION,
                library: "fqharm".into(),
                version: "0".into(),
                tolerance: config.tolerance,
                seeds: config.seeds.clone(),
                config,
            },
            rows,
        }
    }

    #[test]
    fn header_matches_columns() {
        let csv = report(vec![row(Status::Pass)]).to_csv();
        assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "1,3,1,3,2,,full,x,true,1.5,2.0,pass,0.75,0.0,"
        );
        let empty = report(Vec::new()).to_csv();
        assert_eq!(empty.trim_end(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            report(vec![row(Status::Pass), row(Status::Tracked), row(Status::Skipped)]).exit_code(),
            0
        );
        assert_eq!(report(vec![row(Status::Pass), row(Status::Fail)]).exit_code(), 1);
        assert_eq!(report(vec![row(Status::Error)]).exit_code(), 1);
    }

    #[test]
    fn json_round_trips() {
        let r = report(vec![row(Status::Tracked)]);
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let mut skipped = row(Status::Skipped);
        skipped.ratio = f64::NAN;
        let back: Report = serde_json::from_str(&report(vec![skipped]).to_json()).unwrap();
        assert!(back.rows[0].ratio.is_nan());
    }
}
