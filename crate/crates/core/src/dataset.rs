//! CSV ingestion: feature columns followed by one integer label column.

use std::io::Read;

use crate::error::{Error, Result};

/// Raw rows before model-specific validation.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<i64>,
    /// 1-based file line of each row, for error messages.
    pub lines: Vec<usize>,
}

fn ingest(msg: String) -> Error {
    Error::Ingestion(msg)
}

/// Parses a CSV stream. A first row whose fields are not all numeric is taken as a header.
pub fn read_csv<R: Read>(reader: R) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut table = CsvTable { features: Vec::new(), labels: Vec::new(), lines: Vec::new() };
    let mut width = None;
    for (row_no, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| ingest(format!("line {}: {e}", row_no + 1)))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(row_no + 1);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let numeric = rec.iter().all(|f| f.parse::<f64>().is_ok());
        if !numeric && table.labels.is_empty() && width.is_none() {
            width = Some(rec.len());
            continue;
        }
        if rec.len() < 2 {
            return Err(ingest(format!("line {line}: need at least one feature and a label")));
        }
        match width {
            Some(w) if w != rec.len() => {
                return Err(ingest(format!("line {line}: expected {w} fields, found {}", rec.len())));
            }
            _ => width = Some(rec.len()),
        }
        let mut features = Vec::with_capacity(rec.len() - 1);
        for (j, f) in rec.iter().take(rec.len() - 1).enumerate() {
            let v: f64 = f.parse().map_err(|_| ingest(format!("line {line}, column {}: not a number: {f:?}", j + 1)))?;
            if !v.is_finite() {
                return Err(ingest(format!("line {line}, column {}: non-finite value", j + 1)));
            }
            features.push(v);
        }
        let raw = &rec[rec.len() - 1];
        let label: i64 = raw.parse().map_err(|_| ingest(format!("line {line}: label {raw:?} is not an integer")))?;
        table.features.push(features);
        table.labels.push(label);
        table.lines.push(line);
    }
    if table.labels.is_empty() {
        return Err(ingest("no data rows".into()));
    }
    Ok(table)
}

pub fn read_csv_str(text: &str) -> Result<CsvTable> {
    read_csv(text.as_bytes())
}
