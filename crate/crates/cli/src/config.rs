//! Strict, sectioned TOML configuration with unit-bearing values.
//!
//! Every key a command reads is recorded, with its resolved value in canonical SI
//! text, so the run can be written back out as a manifest that reproduces it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use toml::{Table, Value};

use crate::units::{self, Dim};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Quantity(Dim),
    QuantityList(Dim),
    Float,
    Int,
    Text,
    TextList,
}

/// Every accepted key. Anything else in a config file is an error.
pub const SCHEMA: &[(&str, &str, Kind)] = &[
    ("", "command", Kind::Text),
    ("lattice", "kappa", Kind::Quantity(Dim::Rate)),
    ("lattice", "omega0", Kind::Quantity(Dim::Rate)),
    ("lattice", "half_width", Kind::Int),
    ("lattice", "num_aux", Kind::Int),
    ("lattice", "step_index", Kind::Int),
    ("losses", "port", Kind::Quantity(Dim::Rate)),
    ("losses", "site0_extra", Kind::Quantity(Dim::Rate)),
    ("losses", "decay_amplitude", Kind::Quantity(Dim::Rate)),
    ("losses", "decay_length", Kind::Float),
    ("losses", "uniform", Kind::Quantity(Dim::Rate)),
    ("pulse", "amplitude", Kind::Float),
    ("pulse", "width", Kind::Quantity(Dim::Time)),
    ("pulse", "center", Kind::Quantity(Dim::Time)),
    ("pulse", "detuning", Kind::Quantity(Dim::Rate)),
    ("schedule", "phases", Kind::QuantityList(Dim::Phase)),
    ("schedule", "starts", Kind::QuantityList(Dim::Time)),
    ("schedule", "ramp", Kind::Quantity(Dim::Time)),
    ("schedule", "shape", Kind::Text),
    ("time", "dt", Kind::Quantity(Dim::Time)),
    ("time", "end", Kind::Quantity(Dim::Time)),
    ("time", "snapshot_every", Kind::Int),
    ("time", "frame", Kind::Text),
    ("memory", "variant", Kind::Text),
    ("memory", "t_io", Kind::Quantity(Dim::Time)),
    ("memory", "t_s", Kind::Quantity(Dim::Time)),
    ("memory", "ramp", Kind::Quantity(Dim::Time)),
    ("memory", "shape", Kind::Text),
    ("filter", "targets", Kind::QuantityList(Dim::Rate)),
    ("filter", "span", Kind::Quantity(Dim::Rate)),
    ("filter", "points", Kind::Int),
    ("design", "width_3db", Kind::Quantity(Dim::Rate)),
    ("design", "rejection_db", Kind::Float),
    ("cavity", "length", Kind::Quantity(Dim::Length)),
    ("cavity", "reflectivity", Kind::Float),
    ("bands", "phi", Kind::QuantityList(Dim::Phase)),
    ("bands", "points", Kind::Int),
    ("sweep", "axes", Kind::TextList),
];

fn kind_of(section: &str, key: &str) -> Option<Kind> {
    SCHEMA
        .iter()
        .find(|(s, k, _)| *s == section && *k == key)
        .map(|(_, _, kind)| *kind)
}

fn split_path(path: &str) -> (&str, &str) {
    match path.split_once('.') {
        Some((s, k)) => (s, k),
        None => ("", path),
    }
}

/// Lists every key of `table` that is not in the schema.
pub fn unknown_keys(table: &Table) -> Vec<String> {
    let mut errors = Vec::new();
    for (name, value) in table {
        match value {
            Value::Table(inner) if SCHEMA.iter().any(|(s, _, _)| s == name) => {
                for key in inner.keys() {
                    if kind_of(name, key).is_none() {
                        errors.push(format!("unknown key '{name}.{key}'"));
                    }
                }
            }
            _ if kind_of("", name).is_some() => {}
            _ => errors.push(format!("unknown key '{name}'")),
        }
    }
    errors
}

/// Parses a `--set` value: TOML syntax when it parses, a bare string otherwise.
fn override_value(text: &str) -> Value {
    match format!("v = {text}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(text.to_string())),
        Err(_) => Value::String(text.trim().to_string()),
    }
}

/// Applies `section.key=value` overrides in order.
pub fn apply_overrides(table: &mut Table, sets: &[String]) -> Result<(), Vec<String>> {
    let mut errors = Vec::new();
    for set in sets {
        let Some((path, text)) = set.split_once('=') else {
            errors.push(format!("override '{set}' is not of the form key=value"));
            continue;
        };
        let path = path.trim();
        let (section, key) = split_path(path);
        if kind_of(section, key).is_none() {
            errors.push(format!("unknown key '{path}' in override"));
            continue;
        }
        let value = override_value(text);
        if section.is_empty() {
            table.insert(key.to_string(), value);
        } else {
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| Value::Table(Table::new()));
            match entry {
                Value::Table(t) => {
                    t.insert(key.to_string(), value);
                }
                _ => errors.push(format!("'{section}' is not a section")),
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// Reads typed values out of a config table, collecting every problem and
/// recording what was resolved.
pub struct Resolver {
    table: Table,
    kappa: Option<f64>,
    errors: Vec<String>,
    resolved: BTreeMap<String, BTreeMap<String, String>>,
}

impl Resolver {
    pub fn new(table: Table) -> Self {
        let errors = unknown_keys(&table);
        Self {
            table,
            kappa: None,
            errors,
            resolved: BTreeMap::new(),
        }
    }

    pub fn errors(&self) -> &[String] {
        &self.errors
    }

    pub fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    /// Fails with every collected error, if any.
    pub fn finish(&self) -> Result<(), Vec<String>> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(self.errors.clone())
        }
    }

    fn raw(&self, path: &str) -> Option<&Value> {
        let (section, key) = split_path(path);
        if section.is_empty() {
            self.table.get(key)
        } else {
            self.table.get(section)?.as_table()?.get(key)
        }
    }

    fn record(&mut self, path: &str, text: String) {
        let (section, key) = split_path(path);
        self.resolved
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), text);
    }

    /// Resolves `lattice.kappa` (default `1 /us`), which every `kappa`-relative value needs.
    pub fn kappa(&mut self) -> f64 {
        if let Some(k) = self.kappa {
            return k;
        }
        let k = self.quantity("lattice.kappa", Dim::Rate, Some("1 /us"));
        if k.is_finite() && k <= 0.0 {
            self.error("lattice.kappa must be positive");
        }
        self.kappa = Some(k);
        k
    }

    fn parse_quantity(&mut self, path: &str, dim: Dim, text: &str) -> f64 {
        // An invalid kappa is already reported; dependent values just become NaN.
        let kappa = if path == "lattice.kappa" { None } else { self.kappa };
        match units::parse(text, dim, kappa) {
            Ok(v) => v,
            Err(e) => {
                self.error(format!("{path}: {e}"));
                f64::NAN
            }
        }
    }

    /// A quantity in SI units; `default` uses the same unit syntax.
    pub fn quantity(&mut self, path: &str, dim: Dim, default: Option<&str>) -> f64 {
        let text = match self.raw(path) {
            Some(Value::String(s)) => s.clone(),
            Some(other) => {
                self.error(format!("{path}: expected a quoted value with units, got {other}"));
                return f64::NAN;
            }
            None => match default {
                Some(d) => d.to_string(),
                None => {
                    self.error(format!("missing required key '{path}'"));
                    return f64::NAN;
                }
            },
        };
        let v = self.parse_quantity(path, dim, &text);
        self.record(path, format!("\"{}\"", units::format_si(v, dim)));
        v
    }

    pub fn quantity_list(&mut self, path: &str, dim: Dim, default: Option<&[&str]>) -> Vec<f64> {
        let items: Vec<String> = match self.raw(path) {
            Some(Value::Array(a)) => {
                let mut out = Vec::new();
                for v in a {
                    match v {
                        Value::String(s) => out.push(s.clone()),
                        other => {
                            self.error(format!("{path}: expected quoted values with units, got {other}"));
                            return Vec::new();
                        }
                    }
                }
                out
            }
            Some(Value::String(s)) => s.split(',').map(|p| p.trim().to_string()).collect(),
            Some(other) => {
                self.error(format!("{path}: expected a list, got {other}"));
                return Vec::new();
            }
            None => match default {
                Some(d) => d.iter().map(|s| s.to_string()).collect(),
                None => {
                    self.error(format!("missing required key '{path}'"));
                    return Vec::new();
                }
            },
        };
        let values: Vec<f64> = items.iter().map(|t| self.parse_quantity(path, dim, t)).collect();
        let text = values
            .iter()
            .map(|v| format!("\"{}\"", units::format_si(*v, dim)))
            .collect::<Vec<_>>()
            .join(", ");
        self.record(path, format!("[{text}]"));
        values
    }

    pub fn float(&mut self, path: &str, default: Option<f64>) -> f64 {
        let v = match self.raw(path) {
            Some(Value::Float(f)) => *f,
            Some(Value::Integer(i)) => *i as f64,
            Some(other) => {
                self.error(format!("{path}: expected a number, got {other}"));
                return f64::NAN;
            }
            None => match default {
                Some(d) => d,
                None => {
                    self.error(format!("missing required key '{path}'"));
                    return f64::NAN;
                }
            },
        };
        self.record(path, format!("{v:?}"));
        v
    }

    pub fn int(&mut self, path: &str, default: Option<i64>) -> i64 {
        let v = match self.raw(path) {
            Some(Value::Integer(i)) => *i,
            Some(other) => {
                self.error(format!("{path}: expected an integer, got {other}"));
                return 0;
            }
            None => match default {
                Some(d) => d,
                None => {
                    self.error(format!("missing required key '{path}'"));
                    return 0;
                }
            },
        };
        self.record(path, v.to_string());
        v
    }

    pub fn text(&mut self, path: &str, default: Option<&str>) -> String {
        let v = match self.raw(path) {
            Some(Value::String(s)) => s.clone(),
            Some(other) => {
                self.error(format!("{path}: expected a string, got {other}"));
                return String::new();
            }
            None => match default {
                Some(d) => d.to_string(),
                None => {
                    self.error(format!("missing required key '{path}'"));
                    return String::new();
                }
            },
        };
        self.record(path, Value::String(v.clone()).to_string());
        v
    }

    /// Whether the key is present in the table.
    pub fn has(&self, path: &str) -> bool {
        self.raw(path).is_some()
    }

    /// The resolved configuration as a config file.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        if let Some(top) = self.resolved.get("") {
            for (k, v) in top {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        for (section, keys) in &self.resolved {
            if section.is_empty() {
                continue;
            }
            let _ = writeln!(out, "\n[{section}]");
            for (k, v) in keys {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> Table {
        text.parse().unwrap()
    }

    #[test]
    fn unknown_keys_are_all_listed() {
        let t = table("bogus = 1\n[lattice]\nkappa = \"1 /us\"\nkapa = 2\n[memory]\ntio = \"1 s\"\n[extra]\nx = 1");
        let errors = unknown_keys(&t);
        assert_eq!(errors.len(), 4, "{errors:?}");
        assert!(errors.iter().any(|e| e.contains("lattice.kapa")));
        assert!(errors.iter().any(|e| e.contains("memory.tio")));
        assert!(errors.iter().any(|e| e.contains("'extra'")));
    }

    #[test]
    fn overrides_patch_values() {
        let mut t = table("[lattice]\nkappa = \"1 /us\"");
        apply_overrides(
            &mut t,
            &["lattice.kappa=2 /us".into(), "lattice.num_aux=2".into(), "memory.variant=on-demand".into()],
        )
        .unwrap();
        let mut r = Resolver::new(t);
        assert_eq!(r.kappa(), 2e6);
        assert_eq!(r.int("lattice.num_aux", None), 2);
        assert_eq!(r.text("memory.variant", None), "on-demand");
        assert!(apply_overrides(&mut Table::new(), &["nope.x=1".into(), "junk".into()]).unwrap_err().len() == 2);
    }

    #[test]
    fn errors_accumulate() {
        let mut r = Resolver::new(table("[lattice]\nkappa = \"1 /us\"\nomega0 = 3\n[memory]\nt_io = \"20 parsecs\""));
        r.kappa();
        r.quantity("lattice.omega0", Dim::Rate, Some("0 kappa"));
        r.quantity("memory.t_io", Dim::Time, None);
        r.quantity("memory.t_s", Dim::Time, None);
        assert_eq!(r.finish().unwrap_err().len(), 3);
    }

    #[test]
    fn manifest_reproduces_values() {
        let mut r = Resolver::new(table("command = \"memory\"\n[lattice]\nkappa = \"1 /us\"\n[memory]\nt_io = \"20 /kappa\""));
        r.text("command", None);
        r.kappa();
        let t_io = r.quantity("memory.t_io", Dim::Time, None);
        let ramp = r.quantity("memory.ramp", Dim::Time, Some("1 /kappa"));
        let phis = r.quantity_list("bands.phi", Dim::Phase, Some(&["0 rad", "0.5 pi"]));
        let m = r.manifest();
        let mut again = Resolver::new(m.parse().unwrap());
        assert!(again.errors().is_empty());
        again.text("command", None);
        again.kappa();
        assert_eq!(again.quantity("memory.t_io", Dim::Time, None), t_io);
        assert_eq!(again.quantity("memory.ramp", Dim::Time, None), ramp);
        assert_eq!(again.quantity_list("bands.phi", Dim::Phase, None), phis);
        assert_eq!(again.manifest(), m);
    }
}
