//! Cartesian parameter sweeps with one CSV row per point.

use rayon::prelude::*;
use toml::Table;

use crate::commands::{self, CmdError, Command};
use crate::config::{apply_overrides, Resolver};

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

impl Axis {
    /// Parses `section.key=v1,v2,...`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let (key, values) = text
            .split_once('=')
            .ok_or_else(|| format!("sweep axis '{text}' is not of the form key=v1,v2,..."))?;
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
        if values.iter().any(String::is_empty) {
            return Err(format!("sweep axis '{text}' has an empty value"));
        }
        Ok(Self {
            key: key.trim().to_string(),
            values,
        })
    }

    pub fn to_text(&self) -> String {
        format!("{}={}", self.key, self.values.join(","))
    }
}

pub struct Point {
    pub values: Vec<String>,
    pub result: Result<Vec<(String, String)>, CmdError>,
    pub manifest: String,
}

pub struct SweepResult {
    pub points: Vec<Point>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.result.is_err()).count()
    }

    pub fn csv(&self, axes: &[Axis]) -> String {
        let columns: Vec<String> = self
            .points
            .iter()
            .find_map(|p| p.result.as_ref().ok())
            .map(|m| m.iter().map(|(k, _)| k.clone()).collect())
            .unwrap_or_default();
        let mut header: Vec<String> = axes.iter().map(|a| a.key.clone()).collect();
        header.extend(columns.iter().cloned());
        header.push("error".into());
        let mut out = header.iter().map(|h| field(h)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for p in &self.points {
            let mut row: Vec<String> = p.values.iter().map(|v| field(v)).collect();
            match &p.result {
                Ok(m) => {
                    for c in &columns {
                        let v = m.iter().find(|(k, _)| k == c).map_or("", |(_, v)| v.as_str());
                        row.push(field(v));
                    }
                    row.push(String::new());
                }
                Err(e) => {
                    row.extend(columns.iter().map(|_| String::new()));
                    row.push(field(&e.messages().join("; ")));
                }
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Quotes a CSV field when it contains a separator, quote or line break.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Index tuples in lexicographic order, last axis fastest.
fn combinations(axes: &[Axis]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..axis.values.len()).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}

fn run_point(base: &Table, command: Command, axes: &[Axis], idx: &[usize]) -> Point {
    let values: Vec<String> = axes.iter().zip(idx).map(|(a, i)| a.values[*i].clone()).collect();
    let sets: Vec<String> = axes.iter().zip(&values).map(|(a, v)| format!("{}={v}", a.key)).collect();
    let mut table = base.clone();
    if let Err(errors) = apply_overrides(&mut table, &sets) {
        return Point {
            values,
            result: Err(CmdError::Validation(errors)),
            manifest: String::new(),
        };
    }
    let mut r = Resolver::new(table);
    let result = commands::run(command, &mut r, false).map(|o| o.metrics);
    Point {
        values,
        result,
        manifest: r.manifest(),
    }
}

/// Runs every point on a pool of `jobs` threads (0 uses all cores). Row order
/// does not depend on the pool size.
pub fn run(base: &Table, command: Command, axes: &[Axis], jobs: usize) -> Result<SweepResult, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| format!("cannot start worker pool: {e}"))?;
    let combos = combinations(axes);
    let points = pool.install(|| {
        combos
            .par_iter()
            .map(|idx| run_point(base, command, axes, idx))
            .collect()
    });
    Ok(SweepResult { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_parse_and_expand_lexicographically() {
        let a = Axis::parse("memory.t_s=5 /kappa, 20 /kappa").unwrap();
        assert_eq!(a.values, vec!["5 /kappa", "20 /kappa"]);
        assert!(Axis::parse("memory.t_s").is_err());
        assert!(Axis::parse("memory.t_s=1 s,,2 s").is_err());
        let b = Axis::parse("lattice.num_aux=1,2,3").unwrap();
        let c = combinations(&[a, b]);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![0, 0]);
        assert_eq!(c[1], vec![0, 1]);
        assert_eq!(c[3], vec![1, 0]);
    }

    #[test]
    fn csv_fields_are_quoted() {
        assert_eq!(field("a,b"), "\"a,b\"");
        assert_eq!(field("say \"x\""), "\"say \"\"x\"\"\"");
        assert_eq!(field("plain"), "plain");
    }
}
