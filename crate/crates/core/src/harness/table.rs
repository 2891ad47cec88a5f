use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sampling::full_precision;

use super::bench::EstimateRecord;

pub const TABLE_HEADER: [&str; 7] = ["method", "m2", "m3", "neg_s3z", "inertia_i", "seconds", "flags"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            _ => Err(Error::Parse(format!("unknown table format '{s}'"))),
        }
    }
}

impl fmt::Display for TableFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Markdown => "markdown",
        })
    }
}

/// Two decimals with trailing zeros dropped: 5.30 -> "5.3", 3.00 -> "3".
pub fn round2(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// "2 µs" below a millisecond, "4.5 ms" below a second, "3.21 s" above.
pub fn format_duration(seconds: f64) -> String {
    if seconds < 1e-3 {
        format!("{} µs", (seconds * 1e6).round().max(1.0))
    } else if seconds < 1.0 {
        format!("{} ms", round2(seconds * 1e3))
    } else {
        format!("{seconds:.2} s")
    }
}

pub fn emit_table(records: &[EstimateRecord], format: TableFormat) -> String {
    match format {
        TableFormat::Csv => emit_csv(records),
        TableFormat::Markdown => emit_markdown(records),
    }
}

fn emit_csv(records: &[EstimateRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_HEADER).expect("in-memory write");
    for r in records {
        let mut row: Vec<String> = vec![r.method.clone()];
        row.extend(r.values().iter().map(|&v| full_precision(v)));
        row.push(r.seconds.map(full_precision).unwrap_or_default());
        row.push(r.flags.join(";"));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 table")
}

/// Six columns. Flags other than discarded PSO runs are appended to the
/// method cell in brackets.
fn emit_markdown(records: &[EstimateRecord]) -> String {
    let mut out = String::from("| method | m2 | m3 | -s3z | I | computation time |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for r in records {
        let shown: Vec<&str> = r
            .flags
            .iter()
            .map(String::as_str)
            .filter(|f| !f.starts_with("discarded"))
            .collect();
        let name = if shown.is_empty() { r.method.clone() } else { format!("{} [{}]", r.method, shown.join(", ")) };
        let cells: Vec<String> = r.values().iter().map(|&v| round2(v)).collect();
        let time = r.seconds.map(format_duration).unwrap_or_default();
        out.push_str(&format!("| {name} | {} | {time} |\n", cells.join(" | ")));
    }
    out
}

/// Reads back a table written in CSV form.
pub fn parse_table_csv(text: &str) -> Result<Vec<EstimateRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().ne(TABLE_HEADER) {
        return Err(Error::Parse(format!("unexpected table header {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{s}'")));
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        let seconds = match &row[5] {
            "" => None,
            s => Some(num(s)?),
        };
        let flags = match &row[6] {
            "" => Vec::new(),
            s => s.split(';').map(String::from).collect(),
        };
        out.push(EstimateRecord {
            method: row[0].to_string(),
            m2: num(&row[1])?,
            m3: num(&row[2])?,
            neg_s3z: num(&row[3])?,
            inertia_i: num(&row[4])?,
            seconds,
            flags,
        });
    }
    Ok(out)
}
