//! Event-record ingestion.
//!
//! * CSV: header naming the columns `E`, `px`, `py`, `pz` (any order, extra
//!   columns ignored), `.` as decimal point, `#` comment lines.
//! * JSONL: one object per line with numeric `E`, `px`, `py`, `pz`; other
//!   keys are ignored.
//!
//! Values are multiplied by the configured unit scales once, at parse time,
//! so everything downstream works in natural units.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use hidden_angle_core::EventRecord;
use serde::Deserialize;

use crate::error::{AppError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EventFormat {
    Csv,
    Jsonl,
}

impl EventFormat {
    /// `.jsonl` / `.ndjson` are JSON lines, everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("jsonl") | Some("ndjson") => EventFormat::Jsonl,
            _ => EventFormat::Csv,
        }
    }
}

/// Conversion from user units to natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitScale {
    pub energy: f64,
    pub momentum: f64,
}

impl Default for UnitScale {
    fn default() -> Self {
        UnitScale {
            energy: 1.0,
            momentum: 1.0,
        }
    }
}

const COLUMNS: [&str; 4] = ["E", "px", "py", "pz"];

fn record(line: u64, vals: [f64; 4], scale: UnitScale) -> Result<EventRecord> {
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(AppError::NonFiniteValue { line });
    }
    let [e, px, py, pz] = vals;
    EventRecord::new(
        e * scale.energy,
        px * scale.momentum,
        py * scale.momentum,
        pz * scale.momentum,
    )
    .map_err(|_| AppError::NonFiniteValue { line })
}

pub fn parse_events<R: Read>(
    input: R,
    format: EventFormat,
    scale: UnitScale,
) -> Result<Vec<EventRecord>> {
    match format {
        EventFormat::Csv => parse_csv(input, scale),
        EventFormat::Jsonl => parse_jsonl(input, scale),
    }
}

pub fn load_events(
    path: &Path,
    format: Option<EventFormat>,
    scale: UnitScale,
) -> Result<Vec<EventRecord>> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    parse_events(
        BufReader::new(file),
        format.unwrap_or_else(|| EventFormat::from_path(path)),
        scale,
    )
}

fn parse_csv<R: Read>(input: R, scale: UnitScale) -> Result<Vec<EventRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|_| AppError::MissingHeader)?
        .clone();
    let mut index = [0usize; 4];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or(AppError::MissingHeader)?;
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| AppError::MalformedRow {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let mut vals = [0.0; 4];
        for ((v, &i), name) in vals.iter_mut().zip(&index).zip(COLUMNS) {
            let field = row.get(i).ok_or_else(|| AppError::MalformedRow {
                line,
                reason: format!("missing column {name}"),
            })?;
            *v = field.parse().map_err(|_| AppError::MalformedRow {
                line,
                reason: format!("{name}={field:?} is not a number"),
            })?;
        }
        out.push(record(line, vals, scale)?);
    }
    Ok(out)
}

#[derive(Deserialize)]
struct JsonEvent {
    #[serde(rename = "E")]
    e: f64,
    px: f64,
    py: f64,
    pz: f64,
}

fn parse_jsonl<R: Read>(input: R, scale: UnitScale) -> Result<Vec<EventRecord>> {
    let mut out = Vec::new();
    for (idx, text) in BufReader::new(input).lines().enumerate() {
        let line = idx as u64 + 1;
        let text = text.map_err(|e| AppError::MalformedRow {
            line,
            reason: e.to_string(),
        })?;
        let content = text.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let ev: JsonEvent = serde_json::from_str(content).map_err(|e| AppError::MalformedRow {
            line,
            reason: e.to_string(),
        })?;
        out.push(record(line, [ev.e, ev.px, ev.py, ev.pz], scale)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str) -> Result<Vec<EventRecord>> {
        parse_events(text.as_bytes(), EventFormat::Csv, UnitScale::default())
    }

    fn jsonl(text: &str) -> Result<Vec<EventRecord>> {
        parse_events(text.as_bytes(), EventFormat::Jsonl, UnitScale::default())
    }

    #[test]
    fn two_row_csv() {
        let r = csv("E,px,py,pz\n1.0,0.1,0.2,0.3\n2.0,-0.1,0.0,0.5\n").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].e, 2.0);
        assert_eq!(r[0].pz, 0.3);
    }

    #[test]
    fn csv_comments_blank_lines_and_column_order() {
        let r = csv("# run 7\npz,E,px,py,tag\n\n3,1,2,2.5,a\n# mid\n4,5,6,7,b\n").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!((r[0].e, r[0].px, r[0].py, r[0].pz), (1.0, 2.0, 2.5, 3.0));
    }

    #[test]
    fn csv_malformed_row_line() {
        match csv("E,px,py,pz\n1,2,3,4\n1.0,2.0,x,3.0\n") {
            Err(AppError::MalformedRow { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_missing_header() {
        assert!(matches!(
            csv("E,px,py\n1,2,3\n"),
            Err(AppError::MissingHeader)
        ));
        assert!(matches!(
            csv("1.0,2.0,3.0,4.0\n"),
            Err(AppError::MissingHeader)
        ));
    }

    #[test]
    fn csv_non_finite() {
        assert!(matches!(
            csv("E,px,py,pz\n1,NaN,0,0\n"),
            Err(AppError::NonFiniteValue { line: 2 })
        ));
    }

    #[test]
    fn jsonl_extra_keys_ignored() {
        let r = jsonl("{\"E\": 1.5, \"px\": 0, \"py\": 1, \"pz\": 2, \"run\": 17, \"tag\": \"x\"}\n\n# c\n{\"pz\":1,\"py\":1,\"px\":1,\"E\":1}\n")
            .unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].e, 1.5);
    }

    #[test]
    fn jsonl_missing_key() {
        match jsonl("{\"E\": 1, \"px\": 0, \"py\": 1, \"pz\": 2}\n{\"E\": 1, \"px\": 0}\n") {
            Err(AppError::MalformedRow { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unit_scale_applied_once() {
        let scale = UnitScale {
            energy: 1e-3,
            momentum: 2.0,
        };
        let r = parse_events(
            "E,px,py,pz\n1000,1,2,3\n".as_bytes(),
            EventFormat::Csv,
            scale,
        )
        .unwrap();
        assert_eq!((r[0].e, r[0].px, r[0].py, r[0].pz), (1.0, 2.0, 4.0, 6.0));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(
            EventFormat::from_path(Path::new("a.jsonl")),
            EventFormat::Jsonl
        );
        assert_eq!(
            EventFormat::from_path(Path::new("a.NDJSON")),
            EventFormat::Jsonl
        );
        assert_eq!(EventFormat::from_path(Path::new("a.csv")), EventFormat::Csv);
        assert_eq!(
            EventFormat::from_path(Path::new("events")),
            EventFormat::Csv
        );
    }
}
