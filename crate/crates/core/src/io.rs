//! CSV input and report serialization.
//!
//! Two input layouts are accepted:
//!
//! - unpaired, `group,value` rows with group `1` or `2`;
//! - paired, `x1,x2` rows, one matched pair per row.
//!
//! A header row is optional and recognized by its non-numeric cells.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bootstrap::TestReport;
use crate::error::{Error, Result};
use crate::odc::{OdcCurve, TwoSampleData};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn parse_error<T>(line: u64, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: message.into(),
    })
}

fn number(cell: &str, line: u64, column: &str) -> Result<f64> {
    if cell.is_empty() {
        return parse_error(line, format!("missing value in column {column}"));
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => parse_error(line, format!("non-finite value '{cell}' in column {column}")),
        Err(_) => parse_error(line, format!("cannot parse '{cell}' in column {column}")),
    }
}

pub fn parse_csv<R: Read>(input: R, paired: bool) -> Result<TwoSampleData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let (mut x1, mut x2) = (Vec::new(), Vec::new());
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Parse {
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if idx == 0 && record.iter().any(|c| !c.is_empty() && c.parse::<f64>().is_err()) {
            continue;
        }
        if record.len() != 2 {
            return parse_error(line, format!("expected 2 columns, found {}", record.len()));
        }
        if paired {
            x1.push(number(&record[0], line, "x1")?);
            x2.push(number(&record[1], line, "x2")?);
        } else {
            let value = number(&record[1], line, "value")?;
            match record[0].parse::<u32>() {
                Ok(1) => x1.push(value),
                Ok(2) => x2.push(value),
                _ => return parse_error(line, format!("group must be 1 or 2, got '{}'", &record[0])),
            }
        }
    }
    if x1.is_empty() || x2.is_empty() {
        return Err(Error::Domain(if paired {
            "no data rows".into()
        } else {
            "both groups 1 and 2 need at least one observation".into()
        }));
    }
    if paired {
        TwoSampleData::matched(x1, x2)
    } else {
        TwoSampleData::independent(x1, x2)
    }
}

pub fn parse_csv_path(path: &Path, paired: bool) -> Result<TwoSampleData> {
    parse_csv(std::fs::File::open(path)?, paired)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    HumanTable,
}

/// A [`TestReport`] plus provenance fields, as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    #[serde(flatten)]
    pub report: TestReport,
    pub tool_version: String,
    /// Seconds since the Unix epoch; omitted from JSON output so that
    /// repeated runs are byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl ReportDocument {
    pub fn new(report: TestReport) -> Self {
        Self {
            report,
            tool_version: TOOL_VERSION.to_string(),
            timestamp: None,
        }
    }
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

pub fn emit_report(report: &TestReport, format: ReportFormat) -> Result<String> {
    let doc = ReportDocument::new(report.clone());
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::HumanTable => Ok(human_table(&ReportDocument {
            timestamp: Some(now_unix()),
            ..doc
        })),
    }
}

pub fn parse_report(text: &str) -> Result<ReportDocument> {
    Ok(serde_json::from_str(text)?)
}

fn human_table(doc: &ReportDocument) -> String {
    let r = &doc.report;
    let kind = match r.statistic_kind {
        crate::statistics::StatisticKind::Wmw => "one-sided WMW",
        crate::statistics::StatisticKind::Ks => "one-sided KS",
        crate::statistics::StatisticKind::OdcArea => "ODC area",
    };
    let rows: [(&str, String); 13] = [
        ("statistic", format!("{:.6} ({kind})", r.statistic)),
        ("critical value", format!("{:.6}", r.critical_value)),
        ("p-value", format!("{:.4}", r.p_value)),
        ("alpha", r.alpha.to_string()),
        ("tau", r.tau.to_string()),
        ("eta", r.eta.to_string()),
        ("bootstrap draws", r.num_bootstrap.to_string()),
        ("seed", r.seed.to_string()),
        ("pairing", r.pairing.to_string()),
        ("n1", r.n1.to_string()),
        ("n2", r.n2.to_string()),
        ("ties detected", r.ties_detected.to_string()),
        ("version", doc.tool_version.clone()),
    ];
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<16} {v}");
    }
    if let Some(ts) = doc.timestamp {
        let _ = writeln!(out, "{:<16} {ts}", "timestamp");
    }
    if r.ties_detected {
        out.push_str("warning: tied observations present; ranks use the <= convention\n");
    }
    out.push_str(if r.reject {
        "decision: REJECT H0 (dominance of sample 1 over sample 2)\n"
    } else {
        "decision: FAIL TO REJECT H0\n"
    });
    out
}

/// `u,R_hat` rows at u = i/n₂.
pub fn odc_csv(odc: &OdcCurve) -> String {
    let mut out = String::from("u,R_hat\n");
    for (u, r) in odc.grid().zip(odc.values()) {
        let _ = writeln!(out, "{u},{r}");
    }
    out
}
