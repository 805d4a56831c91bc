//! Flat `key = value` run configuration.
//!
//! ```text
//! # resonance scan with a weaker drive
//! preset = fig1a
//! A_X = 0.05
//! values = linspace(1.5, 2.5, 21)
//! ```
//!
//! Times are given in ps, energies and rates in eV, temperature in K.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;

use super::presets;
use super::{Axis, SweepConfig, SweepPlan, OUTPUT_NAMES};
use crate::error::{Error, Result};
use crate::model::PolaritonSpec;
use crate::units;

/// Keys accepted in a config file.
pub const KEYS: &[&str] = &[
    "eps1",
    "eps2",
    "omega",
    "chi",
    "V",
    "omega_drive",
    "A_X",
    "A_P",
    "Gamma_X",
    "Gamma_P",
    "T_env_K",
    "m_o",
    "horizon_ps",
    "eta",
    "axis",
    "values",
    "preset",
    "outputs",
    "cross_terms",
    "zero_point_shift",
    "adaptive_mo",
    "max_mo",
];

/// One `key = value` entry with its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub value: String,
}

/// Splits a document into entries. Syntax problems and duplicate keys are
/// parse errors; key names are not checked here.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse { line, reason: format!("expected `key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::Parse { line, reason: format!("malformed key `{key}`") });
        }
        if value.is_empty() {
            return Err(Error::Parse { line, reason: format!("missing value for `{key}`") });
        }
        if let Some(prev) = out.insert(key.to_string(), Entry { line, value: value.to_string() }) {
            return Err(Error::Parse { line, reason: format!("`{key}` already set on line {}", prev.line) });
        }
    }
    Ok(out)
}

fn number(entry: &Entry) -> Result<f64> {
    entry
        .value
        .parse::<f64>()
        .map_err(|_| Error::Parse { line: entry.line, reason: format!("`{}` is not a number", entry.value) })
}

fn integer(entry: &Entry) -> Result<usize> {
    entry
        .value
        .parse::<usize>()
        .map_err(|_| Error::Parse { line: entry.line, reason: format!("`{}` is not a non-negative integer", entry.value) })
}

fn boolean(entry: &Entry) -> Result<bool> {
    match entry.value.as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(Error::Parse { line: entry.line, reason: format!("`{other}` is not a boolean") }),
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::Validation { key: key.to_string(), reason: reason.into() }
}

/// Parses `a, b, c` or `linspace(start, stop, n)`.
pub fn parse_values(entry: &Entry) -> Result<Vec<f64>> {
    let text = entry.value.trim();
    let parse_err = |reason: String| Error::Parse { line: entry.line, reason };
    let nums = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| parse_err(format!("`{}` is not a number", p.trim()))))
            .collect()
    };
    let values = if let Some(inner) = text.strip_prefix("linspace(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(parse_err("linspace takes (start, stop, count)".into()));
        }
        let start = parts[0].parse::<f64>().map_err(|_| parse_err(format!("bad start `{}`", parts[0])))?;
        let stop = parts[1].parse::<f64>().map_err(|_| parse_err(format!("bad stop `{}`", parts[1])))?;
        let count = parts[2].parse::<usize>().map_err(|_| parse_err(format!("bad count `{}`", parts[2])))?;
        linspace(start, stop, count)
    } else {
        nums(text)?
    };
    Ok(values)
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count).map(|k| if k + 1 == count { stop } else { start + step * k as f64 }).collect()
        }
    }
}

/// Checks that sweep values are finite and strictly monotone.
pub fn check_values(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("values", "all values must be finite"));
    }
    let up = values.windows(2).all(|w| w[1] > w[0]);
    let down = values.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(invalid("values", "values must be strictly increasing or strictly decreasing"));
    }
    Ok(())
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<SweepPlan> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Builds a plan from config text: preset series first (if any), then every
/// explicit key applied on top.
pub fn parse_config(text: &str) -> Result<SweepPlan> {
    let entries = parse_entries(text)?;
    if let Some((key, _)) = entries.iter().find(|(k, _)| !KEYS.contains(&k.as_str())) {
        return Err(invalid(key, "unknown key"));
    }

    let mut plan = match entries.get("preset") {
        Some(entry) => presets::preset(&entry.value)?,
        None => SweepPlan {
            name: "custom".into(),
            notes: String::new(),
            series: vec![SweepConfig::new(PolaritonSpec::default(), Axis::V, Vec::new())],
        },
    };

    let axis = match entries.get("axis") {
        Some(e) => Some(Axis::parse(&e.value).ok_or_else(|| invalid("axis", format!("unknown axis `{}`", e.value)))?),
        None => None,
    };
    let values = entries.get("values").map(parse_values).transpose()?;
    let outputs = match entries.get("outputs") {
        Some(e) => {
            let names: Vec<String> = e.value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            if let Some(bad) = names.iter().find(|n| !OUTPUT_NAMES.contains(&n.as_str())) {
                return Err(invalid("outputs", format!("unknown output `{bad}`")));
            }
            Some(names)
        }
        None => None,
    };

    for cfg in &mut plan.series {
        apply_overrides(&mut cfg.base, &entries)?;
        if let Some(axis) = axis {
            cfg.axis = axis;
        }
        if let Some(values) = &values {
            cfg.values = values.clone();
        }
        if let Some(outputs) = &outputs {
            cfg.outputs = outputs.clone();
        }
        if let Some(e) = entries.get("adaptive_mo") {
            cfg.adaptive_mo = boolean(e)?;
        }
        if let Some(e) = entries.get("max_mo") {
            cfg.max_mo = integer(e)?;
        }
    }
    plan.validate()?;
    Ok(plan)
}

fn apply_overrides(spec: &mut PolaritonSpec, entries: &BTreeMap<String, Entry>) -> Result<()> {
    let get = |k: &str| entries.get(k);
    if let Some(e) = get("eps1") {
        spec.eps1 = number(e)?;
    }
    if let Some(e) = get("eps2") {
        spec.eps2 = number(e)?;
    }
    if let Some(e) = get("omega") {
        spec.omega = number(e)?;
    }
    if let Some(e) = get("chi") {
        spec.chi = number(e)?;
    }
    if let Some(e) = get("V") {
        spec.coupling = Complex64::new(number(e)?, 0.0);
    }
    if let Some(e) = get("omega_drive") {
        spec.omega_drive = number(e)?;
    }
    if let Some(e) = get("A_X") {
        spec.a_x = number(e)?;
    }
    if let Some(e) = get("A_P") {
        spec.a_p = number(e)?;
    }
    if let Some(e) = get("Gamma_X") {
        spec.gamma_x = number(e)?;
    }
    if let Some(e) = get("Gamma_P") {
        spec.gamma_p = number(e)?;
    }
    if let Some(e) = get("T_env_K") {
        spec.t_env = number(e)?;
    }
    if let Some(e) = get("m_o") {
        spec.m_o = integer(e)?;
    }
    if let Some(e) = get("horizon_ps") {
        spec.t_final = units::ps_to_inv_ev(number(e)?);
    }
    if let Some(e) = get("eta") {
        spec.eta = Some(number(e)?);
    }
    if let Some(e) = get("cross_terms") {
        spec.cross_terms = boolean(e)?;
    }
    if let Some(e) = get("zero_point_shift") {
        spec.zero_point_shift = boolean(e)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blanks() {
        let e = parse_entries("# header\n\nchi = 1e-4  # trailing\n").unwrap();
        assert_eq!(e["chi"], Entry { line: 3, value: "1e-4".into() });
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        match parse_entries("chi = 1\nnonsense\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_entries("chi = 1\nchi = 2"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn value_lists() {
        let e = Entry { line: 1, value: "linspace(1, 3, 5)".into() };
        assert_eq!(parse_values(&e).unwrap(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        let e = Entry { line: 1, value: "0.1, 0.2,0.4".into() };
        assert_eq!(parse_values(&e).unwrap(), vec![0.1, 0.2, 0.4]);
        assert!(check_values(&[1.0, 1.0]).is_err());
        assert!(check_values(&[3.0, 2.0, 1.0]).is_ok());
    }

    #[test]
    fn linspace_endpoints_are_exact() {
        let v = linspace(0.0, 9e-5, 10);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[9], 9e-5);
        assert_eq!(v.len(), 10);
    }
}
