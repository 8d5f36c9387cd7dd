//! Machine-readable reports in JSON, CSV or an aligned text table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ctbounds::LogValue;
use serde::{Deserialize, Serialize};

use crate::instance::InstanceFile;
use crate::CliError;

pub const CSV_HEADER: [&str; 6] = ["case", "bound", "log10", "display", "valid", "seconds"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Display agrees with the expected string.
    Match,
    Mismatch,
    /// Not recomputed; the expected value is echoed.
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub case: String,
    pub bound: String,
    /// `None` for zero and infinite values; `display` tells them apart.
    pub log10: Option<f64>,
    pub display: String,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    pub seconds: f64,
    /// Exact integer or rational, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<Status>,
}

/// `log10` rounded to 12 decimals so that every format carries the same payload.
fn payload_log10(v: LogValue) -> Option<f64> {
    v.is_finite().then(|| (v.log10() * 1e12).round() / 1e12)
}

impl Record {
    pub fn new(case: &str, bound: &str, value: LogValue, digits: usize) -> Record {
        Record {
            case: case.to_string(),
            bound: bound.to_string(),
            log10: payload_log10(value),
            display: value.to_display(digits),
            valid: true,
            note: String::new(),
            seconds: 0.0,
            exact: None,
            expected: None,
            status: None,
        }
    }

    pub fn valid(mut self, valid: bool) -> Record {
        self.valid = valid;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Record {
        self.note = note.into();
        self
    }

    pub fn seconds(mut self, seconds: f64) -> Record {
        self.seconds = seconds;
        self
    }

    pub fn exact(mut self, exact: impl Into<String>) -> Record {
        self.exact = Some(exact.into());
        self
    }

    /// Compares against an expected display string such as `"3.0e30"`.
    pub fn expect(mut self, value: LogValue, expected: &str) -> Record {
        self.status = Some(if value.matches_display(expected) { Status::Match } else { Status::Mismatch });
        self.expected = Some(expected.to_string());
        self
    }

    /// Echoes a reference value that was not recomputed.
    pub fn reference(case: &str, bound: &str, expected: &str) -> Record {
        let parsed = ctbounds::logvalue::parse_display(expected);
        Record {
            case: case.to_string(),
            bound: bound.to_string(),
            log10: parsed.map(|(m, e, _)| e as f64 + m.log10()),
            display: expected.to_string(),
            valid: true,
            note: "reference value, not recomputed".into(),
            seconds: 0.0,
            exact: None,
            expected: Some(expected.to_string()),
            status: Some(Status::Reference),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub settings: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceFile>,
    pub records: Vec<Record>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl Report {
    pub fn new(command: &str, settings: BTreeMap<String, String>, instance: Option<InstanceFile>) -> Report {
        Report {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            settings,
            instance,
            records: Vec::new(),
        }
    }

    pub fn mismatches(&self) -> Vec<&Record> {
        self.records.iter().filter(|r| r.status == Some(Status::Mismatch)).collect()
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => serde_json::to_string_pretty(self).map_err(|e| CliError::Output(e.to_string())),
            Format::Csv => self.to_csv(),
            Format::Table => Ok(self.to_table()),
        }
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(CSV_HEADER).map_err(err)?;
        for r in &self.records {
            let log10 = match r.log10 {
                Some(x) => x.to_string(),
                None => String::new(),
            };
            let valid = r.valid.to_string();
            let seconds = format!("{:.6}", r.seconds);
            w.write_record([r.case.as_str(), &r.bound, &log10, &r.display, &valid, &seconds]).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
    }

    fn to_table(&self) -> String {
        let head = ["case", "bound", "value", "valid", "expected", "status", "seconds", "note"];
        let rows: Vec<[String; 8]> = self
            .records
            .iter()
            .map(|r| {
                [
                    r.case.clone(),
                    r.bound.clone(),
                    r.exact.clone().unwrap_or_else(|| r.display.clone()),
                    if r.valid { "yes".into() } else { "no".into() },
                    r.expected.clone().unwrap_or_default(),
                    r.status.map(|s| format!("{s:?}").to_lowercase()).unwrap_or_default(),
                    format!("{:.3}", r.seconds),
                    r.note.clone(),
                ]
            })
            .collect();
        let mut width = head.map(str::len);
        for row in &rows {
            for (w, cell) in width.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let mut line = |cells: Vec<&str>| {
            let text: Vec<String> = cells.iter().zip(width).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", text.join("  ").trim_end());
        };
        line(head.to_vec());
        for row in &rows {
            line(row.iter().map(String::as_str).collect());
        }
        out
    }
}

/// One parsed CSV row: `(case, bound, log10, display, valid)`.
pub type CsvRow = (String, String, Option<f64>, String, bool);

/// Parses the CSV produced by [`Report::to_csv`] back into rows.
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, CliError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Input(e.to_string()))?;
        let log10 = if rec[2].is_empty() {
            None
        } else {
            Some(rec[2].parse::<f64>().map_err(|e| CliError::Input(e.to_string()))?)
        };
        out.push((rec[0].to_string(), rec[1].to_string(), log10, rec[3].to_string(), &rec[4] == "true"));
    }
    Ok(out)
}
