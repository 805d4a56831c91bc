//! CSV and JSON writers plus the `.meta.json` sidecar.
//!
//! CSV columns, in order:
//! `axis_value, E_TLS, E_pho, E_int, E_total, Qdot_X, Qdot_P, Wbar, Qbar_irr,
//! Eff, S, stationary, residual, error`, followed by `E_total_direct,
//! rel_diff_direct` when the oracle ran. Floats carry 17 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use super::{ResultTable, Row, SweepConfig, SweepPlan};
use crate::error::{Error, Result};
use crate::thermo::{ThermoRecord, SIGN_CONVENTION};
use crate::units;

pub const CSV_COLUMNS: [&str; 14] = [
    "axis_value",
    "E_TLS",
    "E_pho",
    "E_int",
    "E_total",
    "Qdot_X",
    "Qdot_P",
    "Wbar",
    "Qbar_irr",
    "Eff",
    "S",
    "stationary",
    "residual",
    "error",
];

pub const ORACLE_COLUMNS: [&str; 2] = ["E_total_direct", "rel_diff_direct"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// 17 significant digits, `NaN`/`inf` spelled out.
fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn json_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn record_or_nan(row: &Row, f: impl Fn(&ThermoRecord) -> f64) -> f64 {
    row.record.as_ref().map(f).unwrap_or(f64::NAN)
}

pub fn to_csv(table: &ResultTable) -> String {
    let mut out = String::new();
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if table.oracle {
        header.extend(ORACLE_COLUMNS);
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &table.rows {
        let r = |f: fn(&ThermoRecord) -> f64| float(record_or_nan(row, f));
        let mut fields = vec![
            float(row.axis_value),
            r(|x| x.e_tls),
            r(|x| x.e_pho),
            r(|x| x.e_int),
            r(|x| x.e_total),
            r(|x| x.qdot_x),
            r(|x| x.qdot_p),
            r(|x| x.wbar),
            r(|x| x.qbar_irr),
            r(|x| x.eff),
            r(|x| x.s),
            row.record.as_ref().map(|x| x.stationary.to_string()).unwrap_or_else(|| "false".into()),
            r(|x| x.residual),
            csv_field(row.error.as_deref().unwrap_or("")),
        ];
        if table.oracle {
            let (e, d) = row.oracle.map(|o| (o.e_total_direct, o.rel_diff)).unwrap_or((f64::NAN, f64::NAN));
            fields.push(float(e));
            fields.push(float(d));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Every named observable of a record, in `OUTPUT_NAMES` order.
fn observables(r: &ThermoRecord) -> [(&'static str, f64); 17] {
    [
        ("E_TLS", r.e_tls),
        ("E_pho", r.e_pho),
        ("E_int", r.e_int),
        ("E_total", r.e_total),
        ("Qdot_X", r.qdot_x),
        ("Qdot_P", r.qdot_p),
        ("Wdot_X", r.wdot_x),
        ("Wdot_P", r.wdot_p),
        ("Wbar", r.wbar),
        ("Qbar_irr", r.qbar_irr),
        ("Qdot_irrev", r.qdot_irrev),
        ("Eff", r.eff),
        ("S", r.s),
        ("Sdot_X", r.sdot.x),
        ("Sdot_P", r.sdot.p),
        ("Sdot_dX", r.sdot.dx),
        ("Sdot_dP", r.sdot.dp),
    ]
}

const RATE_NAMES: [&str; 5] = ["Qdot_X", "Qdot_P", "Wdot_X", "Wdot_P", "Qdot_irrev"];

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Array of row objects restricted to the table's `outputs`; rates also
/// appear converted to eV/fs under `<name>_eV_per_fs`.
pub fn to_json(table: &ResultTable) -> String {
    let mut out = String::from("[");
    for (i, row) in table.rows.iter().enumerate() {
        out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
        let mut fields: Vec<String> = vec![
            format!("\"axis\": {}", json_string(table.axis.key())),
            format!("\"axis_value\": {}", json_float(row.axis_value)),
            format!("\"m_o\": {}", row.record.as_ref().map(|r| r.m_o).unwrap_or(row.spec.m_o)),
        ];
        if let Some(rec) = &row.record {
            for (name, value) in observables(rec) {
                if table.outputs.iter().any(|o| o == name) {
                    fields.push(format!("{}: {}", json_string(name), json_float(value)));
                    if RATE_NAMES.contains(&name) {
                        let converted = units::rate_to_ev_per_fs(value);
                        fields.push(format!("\"{name}_eV_per_fs\": {}", json_float(converted)));
                    }
                }
            }
            fields.push(format!("\"stationary\": {}", rec.stationary));
            fields.push(format!("\"residual\": {}", json_float(rec.residual)));
        } else {
            fields.push("\"stationary\": false".into());
        }
        if let Some(o) = row.oracle {
            fields.push(format!("\"E_total_direct\": {}", json_float(o.e_total_direct)));
            fields.push(format!("\"rel_diff_direct\": {}", json_float(o.rel_diff)));
        }
        let err = row.error.as_deref().map(json_string).unwrap_or_else(|| "null".into());
        fields.push(format!("\"error\": {err}"));
        out.push_str(&fields.join(", "));
        out.push('}');
    }
    out.push_str(if table.rows.is_empty() { "]\n" } else { "\n]\n" });
    out
}

/// SHA-256 (hex) of the canonical JSON form of a series configuration.
pub fn config_hash(cfg: &SweepConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("configs serialize");
    Sha256::digest(canonical.as_bytes()).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Sidecar metadata. The timestamp sits on its own line.
pub fn metadata(plan: &SweepPlan, cfg: &SweepConfig, rows: usize, timestamp: u64) -> String {
    format!(
        "{{\n  \"timestamp_unix\": {timestamp},\n  \"preset\": {},\n  \"series\": {},\n  \"axis\": {},\n  \"rows\": {rows},\n  \"config_sha256\": \"{}\",\n  \"sign_convention\": {},\n  \"notes\": {},\n  \"version\": \"{}\"\n}}\n",
        json_string(&plan.name),
        json_string(&cfg.label),
        json_string(cfg.axis.key()),
        config_hash(cfg),
        json_string(SIGN_CONVENTION),
        json_string(&plan.notes),
        env!("CARGO_PKG_VERSION"),
    )
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// `<path>.meta.json`
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes one table and its sidecar.
pub fn write_table(plan: &SweepPlan, cfg: &SweepConfig, table: &ResultTable, format: Format, path: &Path) -> Result<()> {
    let body = match format {
        Format::Csv => to_csv(table),
        Format::Json => to_json(table),
    };
    write_file(path, &body)?;
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    write_file(&meta_path(path), &metadata(plan, cfg, table.rows.len(), ts))
}

/// Output path of one series: `path` itself for single-series plans,
/// otherwise `<stem>_<label>.<ext>` next to it.
pub fn series_path(path: &Path, label: &str, series_count: usize, format: Format) -> PathBuf {
    if series_count <= 1 || label.is_empty() {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| format.extension().into());
    path.with_file_name(format!("{stem}_{label}.{ext}"))
}

/// Writes every series of a plan, returning the paths written.
pub fn write_plan_results(plan: &SweepPlan, tables: &[ResultTable], format: Format, path: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (cfg, table) in plan.series.iter().zip(tables) {
        let p = series_path(path, &cfg.label, plan.series.len(), format);
        write_table(plan, cfg, table, format, &p)?;
        written.push(p);
    }
    Ok(written)
}
