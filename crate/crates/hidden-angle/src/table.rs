//! Two-column text tables of a sampled wavefunction.
//!
//! Each data line holds `x value`, separated by whitespace or a comma.
//! Blank lines and lines starting with `#` are skipped.

use std::fs;
use std::path::Path;

use hidden_angle_core::{AxisParams, AxisState, HBar};

use crate::error::{AppError, Result};

pub fn parse_table(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx as u64 + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(AppError::MalformedRow {
                line,
                reason: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        let parse = |f: &str| {
            f.parse::<f64>().map_err(|e| AppError::MalformedRow {
                line,
                reason: format!("{f:?}: {e}"),
            })
        };
        let (x, v) = (parse(fields[0])?, parse(fields[1])?);
        if !x.is_finite() || !v.is_finite() {
            return Err(AppError::NonFiniteValue { line });
        }
        grid.push(x);
        values.push(v);
    }
    Ok((grid, values))
}

pub fn load_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_table(&text)
}

/// Reads a table and builds the normalized tabulated state.
pub fn load_axis_state(path: &Path, hbar: HBar) -> Result<AxisState> {
    let (grid, values) = load_table(path)?;
    Ok(AxisState::new(
        AxisParams::Tabulated { grid, values },
        hbar,
    )?)
}
