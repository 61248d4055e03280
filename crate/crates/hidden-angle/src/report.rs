//! Serializable report shapes and their JSON / CSV / human renderings.
//!
//! Field names are part of the published schemas under `schemas/`. The
//! hidden angle щ is spelled `shcha`.

use hidden_angle_core::event_stats::{SampleMoments, VelocityReport};
use hidden_angle_core::verify::VerifySummary;
use hidden_angle_core::UncertaintyReport;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::OutputFormat;

#[derive(Debug, Clone, Serialize)]
pub struct StateReportJson {
    pub hbar: f64,
    pub family: String,
    pub quantum_numbers: [Option<u32>; 3],
    /// `closed_form` or `quadrature`.
    pub route: &'static str,
    pub position_variances: [f64; 3],
    pub momentum_variances: [f64; 3],
    pub per_axis_products: [f64; 3],
    pub dot_product: f64,
    pub norm_p2: f64,
    pub norm_r2: f64,
    pub cos_geometric: f64,
    pub cos_saturation: f64,
    pub shcha_geometric_rad: Option<f64>,
    pub shcha_saturation_rad: Option<f64>,
    pub saturation_exceeds_unity: bool,
    pub per_axis_holds: [bool; 3],
    pub aggregated_holds: bool,
    pub slack: f64,
    pub saturation_slack: f64,
}

impl StateReportJson {
    pub fn new(
        r: &UncertaintyReport,
        family: &str,
        quantum_numbers: [Option<u32>; 3],
        route: &'static str,
    ) -> Self {
        StateReportJson {
            hbar: r.hbar,
            family: family.to_owned(),
            quantum_numbers,
            route,
            position_variances: r.position_variances.components(),
            momentum_variances: r.momentum_variances.components(),
            per_axis_products: r.per_axis_products,
            dot_product: r.dot_product,
            norm_p2: r.norm_p2,
            norm_r2: r.norm_r2,
            cos_geometric: r.cos_geometric,
            cos_saturation: r.cos_saturation,
            shcha_geometric_rad: r.angle_geometric,
            shcha_saturation_rad: r.angle_saturation,
            saturation_exceeds_unity: r.saturation_exceeds_unity,
            per_axis_holds: r.per_axis_holds,
            aggregated_holds: r.aggregated_holds,
            slack: r.slack,
            saturation_slack: r.saturation_slack(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentsJson {
    pub n_events: usize,
    #[serde(rename = "var_E")]
    pub var_e: f64,
    #[serde(rename = "P2")]
    pub p2: [f64; 3],
    #[serde(rename = "P2_norm")]
    pub p2_norm: f64,
}

impl From<&SampleMoments> for MomentsJson {
    fn from(m: &SampleMoments) -> Self {
        MomentsJson {
            n_events: m.n_events,
            var_e: m.var_e,
            p2: m.p2.components(),
            p2_norm: m.p2.norm(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationJson {
    pub mode: &'static str,
    pub delta: Option<f64>,
    pub cos_u: Option<f64>,
    pub u_ref: Option<f64>,
    pub reference: Option<MomentsJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VelocityJson {
    pub n_events: usize,
    #[serde(rename = "var_E")]
    pub var_e: f64,
    #[serde(rename = "P2")]
    pub p2: [f64; 3],
    #[serde(rename = "P2_norm")]
    pub p2_norm: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub u2_norm: f64,
    pub u_bound: f64,
    pub calibration: CalibrationJson,
    pub u2_norm_kind: &'static str,
    pub u_bound_kind: &'static str,
    pub variance_estimator: &'static str,
    pub units: &'static str,
}

impl From<&VelocityReport> for VelocityJson {
    fn from(r: &VelocityReport) -> Self {
        VelocityJson {
            n_events: r.moments.n_events,
            var_e: r.moments.var_e,
            p2: r.moments.p2.components(),
            p2_norm: r.p2_norm,
            a: r.estimate.a,
            u2_norm: r.estimate.u2_norm,
            u_bound: r.estimate.u_bound,
            calibration: CalibrationJson {
                mode: r.mode.name(),
                delta: r.estimate.delta,
                cos_u: r.estimate.cos_u,
                u_ref: r.u_ref,
                reference: r.reference.as_ref().map(MomentsJson::from),
            },
            u2_norm_kind: "order_of_magnitude",
            u_bound_kind: "upper_bound",
            variance_estimator: "unbiased_n_minus_1",
            units: "natural_c_1",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: u32,
    pub cos_closed: f64,
    pub cos_saturation_numeric: f64,
    pub abs_diff: f64,
}

impl SweepRow {
    pub const COLUMNS: [&'static str; 4] =
        ["n", "cos_closed", "cos_saturation_numeric", "abs_diff"];
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyJson {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub passed: bool,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyJson {
    pub seed: u64,
    pub cases: usize,
    pub passed: bool,
    pub properties: Vec<PropertyJson>,
}

impl From<&VerifySummary> for VerifyJson {
    fn from(s: &VerifySummary) -> Self {
        VerifyJson {
            seed: s.seed,
            cases: s.cases,
            passed: s.all_passed(),
            properties: s
                .outcomes
                .iter()
                .map(|o| PropertyJson {
                    name: o.name,
                    cases: o.cases,
                    failures: o.failures,
                    passed: o.passed(),
                    first_failure: o.first_failure.clone(),
                })
                .collect(),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

// Flattens nested objects to dotted keys and 3-arrays to _x/_y/_z suffixes.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) if items.len() == 3 && items.iter().all(|i| !i.is_object()) => {
            for (suffix, item) in ["x", "y", "z"].iter().zip(items) {
                flatten(&format!("{prefix}_{suffix}"), item, out);
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), item, out);
            }
        }
        Value::Null => out.push((prefix.to_owned(), String::new())),
        Value::String(s) => out.push((prefix.to_owned(), s.clone())),
        other => out.push((prefix.to_owned(), other.to_string())),
    }
}

fn csv_line(fields: impl IntoIterator<Item = String>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Renders one report object.
pub fn render<T: Serialize>(report: &T, format: OutputFormat) -> String {
    let value = to_value(report);
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("json");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut pairs = Vec::new();
            flatten("", &value, &mut pairs);
            let header = csv_line(pairs.iter().map(|(k, _)| k.clone()));
            header + &csv_line(pairs.into_iter().map(|(_, v)| v))
        }
        OutputFormat::Human => {
            let mut pairs = Vec::new();
            flatten("", &value, &mut pairs);
            let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            pairs
                .iter()
                .map(|(k, v)| format!("{k:<width$}  {v}\n"))
                .collect()
        }
    }
}

/// Renders a table of rows sharing one shape; `columns` heads an empty table.
pub fn render_rows<T: Serialize>(rows: &[T], columns: &[&str], format: OutputFormat) -> String {
    let values: Vec<Value> = rows.iter().map(to_value).collect();
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&Value::Array(values)).expect("json");
            s.push('\n');
            s
        }
        OutputFormat::Csv | OutputFormat::Human => {
            let table: Vec<Vec<(String, String)>> = values
                .iter()
                .map(|v| {
                    let mut pairs = Vec::new();
                    flatten("", v, &mut pairs);
                    pairs
                })
                .collect();
            let header: Vec<String> = match table.first() {
                Some(first) => first.iter().map(|(k, _)| k.clone()).collect(),
                None => columns.iter().map(|c| c.to_string()).collect(),
            };
            if format == OutputFormat::Csv {
                let mut s = csv_line(header);
                for row in &table {
                    s += &csv_line(row.iter().map(|(_, v)| v.clone()));
                }
                return s;
            }
            let mut widths: Vec<usize> = header.iter().map(String::len).collect();
            for row in &table {
                for (w, (_, v)) in widths.iter_mut().zip(row) {
                    *w = (*w).max(v.len());
                }
            }
            let line = |cells: Vec<&str>| {
                let mut s: String = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ");
                s.push('\n');
                s
            };
            let mut s = line(header.iter().map(String::as_str).collect());
            for row in &table {
                s += &line(row.iter().map(|(_, v)| v.as_str()).collect());
            }
            s
        }
    }
}

/// Object view of a report, for tests and schema validation.
pub fn to_object<T: Serialize>(report: &T) -> Map<String, Value> {
    match to_value(report) {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}
