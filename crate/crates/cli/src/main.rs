//! `synlat` command-line front end.

mod commands;
mod config;
mod svg;
mod sweep;
mod units;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use toml::{Table, Value};

use commands::{CmdError, Command};
use config::{apply_overrides, Resolver};
use sweep::Axis;

/// Built-in configs as `(name, alias, toml)`.
const PRESETS: &[(&str, &str, &str)] = &[
    ("echo", "fig4a", include_str!("../presets/echo.toml")),
    ("on-demand", "fig4c", include_str!("../presets/on-demand.toml")),
    ("lossy-echo", "fig5", include_str!("../presets/lossy-echo.toml")),
    ("single-stage", "fig6b", include_str!("../presets/single-stage.toml")),
    ("two-stage", "fig6d", include_str!("../presets/two-stage.toml")),
];

#[derive(Parser)]
#[command(name = "synlat", version, about = "Synthetic OAM-lattice memory and filter simulator")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in config: echo, on-demand, lossy-echo, single-stage or two-stage.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "synlat-out")]
    out: PathBuf,
    /// Overrides a config value, e.g. `--set "memory.t_s=30 /kappa"`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Sweep axis, e.g. `--sweep "memory.t_s=5 /kappa,20 /kappa"`. Repeatable.
    #[arg(long = "sweep", value_name = "KEY=V1,V2,...")]
    sweep: Vec<String>,
    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Skip SVG plots.
    #[arg(long)]
    no_svg: bool,
}

#[derive(Subcommand)]
enum Sub {
    /// Integrate a scenario with an arbitrary phase schedule.
    Simulate(Common),
    /// Run a memory protocol and score the read-out.
    Memory(Common),
    /// Tabulate the Bloch band.
    Bands {
        #[command(flatten)]
        common: Common,
        /// Comma-separated phases; bare numbers are radians.
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        num_aux: Option<i64>,
        #[arg(long)]
        points: Option<i64>,
    },
    /// Reflection response and stopband metrics of a filter cascade.
    Filter(Common),
    /// Search two-stage filter designs for a target stopband.
    Design(Common),
    /// Model rates from cavity length and mirror reflectivity.
    Params {
        #[command(flatten)]
        common: Common,
        /// Cavity length with units, e.g. "30 cm".
        #[arg(long)]
        length: Option<String>,
        /// Power reflectivity of the coupling mirror.
        #[arg(long)]
        reflectivity: Option<f64>,
    },
    /// Sweep any command over a grid of config values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Command to sweep; defaults to the config's `command` key.
        #[arg(long)]
        command: Option<String>,
    },
}

enum Failure {
    Validation(Vec<String>),
    Numerical(String),
    Io(String),
    Partial { failed: usize, total: usize, errors: Vec<String> },
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Partial { .. } => 4,
            Failure::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Validation(_) => "validation",
            Failure::Numerical(_) => "numerical",
            Failure::Partial { .. } => "partial-sweep",
            Failure::Io(_) => "io",
        }
    }

    fn messages(&self) -> Vec<String> {
        match self {
            Failure::Validation(v) => v.clone(),
            Failure::Numerical(m) | Failure::Io(m) => vec![m.clone()],
            Failure::Partial { errors, .. } => errors.clone(),
        }
    }
}

impl From<CmdError> for Failure {
    fn from(e: CmdError) -> Self {
        match e {
            CmdError::Validation(v) => Failure::Validation(v),
            CmdError::Numerical(m) => Failure::Numerical(m),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn load(common: &Common) -> Result<Table, Failure> {
    let (name, text) = match (&common.preset, &common.config) {
        (Some(_), Some(_)) => {
            return Err(Failure::Validation(vec!["use either --preset or --config, not both".into()]))
        }
        (Some(p), None) => match PRESETS.iter().find(|(n, a, _)| n == p || a == p) {
            Some((_, _, t)) => (format!("preset {p}"), t.to_string()),
            None => {
                let names: Vec<&str> = PRESETS.iter().map(|(n, _, _)| *n).collect();
                return Err(Failure::Validation(vec![format!(
                    "unknown preset '{p}' (available: {})",
                    names.join(", ")
                )]));
            }
        },
        (None, Some(path)) => (
            path.display().to_string(),
            fs::read_to_string(path).map_err(|e| io_err(path, e))?,
        ),
        (None, None) => return Ok(Table::new()),
    };
    text.parse::<Table>()
        .map_err(|e| Failure::Validation(vec![format!("{name}: {}", e.to_string().trim())]))
}

fn write(dir: &Path, name: &str, content: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(&path, content).map_err(|e| io_err(&path, e))
}

/// Command-specific flags expressed as config overrides.
fn flag_overrides(sub: &Sub) -> Vec<String> {
    let mut sets = Vec::new();
    match sub {
        Sub::Bands { phi, num_aux, points, .. } => {
            if let Some(phi) = phi {
                let items: Vec<String> = phi
                    .split(',')
                    .map(|p| {
                        let p = p.trim();
                        if p.parse::<f64>().is_ok() {
                            format!("\"{p} rad\"")
                        } else {
                            format!("\"{p}\"")
                        }
                    })
                    .collect();
                sets.push(format!("bands.phi=[{}]", items.join(", ")));
            }
            if let Some(n) = num_aux {
                sets.push(format!("lattice.num_aux={n}"));
            }
            if let Some(n) = points {
                sets.push(format!("bands.points={n}"));
            }
        }
        Sub::Params { length, reflectivity, .. } => {
            if let Some(l) = length {
                sets.push(format!("cavity.length={}", Value::String(l.clone())));
            }
            if let Some(r) = reflectivity {
                sets.push(format!("cavity.reflectivity={r:?}"));
            }
        }
        _ => {}
    }
    sets
}

fn run_single(command: Command, table: Table, common: &Common) -> Result<(), Failure> {
    let mut r = Resolver::new(table);
    let outcome = commands::run(command, &mut r, !common.no_svg)?;
    for (name, content) in &outcome.files {
        write(&common.out, name, content)?;
    }
    write(&common.out, "manifest.toml", &r.manifest())?;
    print!("{}", outcome.summary);
    Ok(())
}

fn run_sweep(command: Command, mut table: Table, axes: Vec<Axis>, common: &Common) -> Result<(), Failure> {
    let errors = config::unknown_keys(&table);
    if !errors.is_empty() {
        return Err(Failure::Validation(errors));
    }
    let mut bad = Vec::new();
    for a in &axes {
        let (section, key) = a.key.split_once('.').unwrap_or(("", a.key.as_str()));
        if !config::SCHEMA.iter().any(|(s, k, _)| *s == section && *k == key) {
            bad.push(format!("sweep axis '{}' is not a config key", a.key));
        }
    }
    if !bad.is_empty() {
        return Err(Failure::Validation(bad));
    }
    let result = sweep::run(&table, command, &axes, common.jobs).map_err(Failure::Io)?;
    write(&common.out, "sweep.csv", &result.csv(&axes))?;
    for (n, p) in result.points.iter().enumerate() {
        write(&common.out, &format!("points/point-{n:04}.toml"), &p.manifest)?;
    }
    table.insert("command".into(), Value::String(command.name().into()));
    let mut section = Table::new();
    section.insert(
        "axes".into(),
        Value::Array(axes.iter().map(|a| Value::String(a.to_text())).collect()),
    );
    table.insert("sweep".into(), Value::Table(section));
    let manifest = toml::to_string(&table).map_err(|e| Failure::Io(e.to_string()))?;
    write(&common.out, "manifest.toml", &manifest)?;

    let total = result.points.len();
    let failed = result.failures();
    println!("{} point(s), {failed} failed", total);
    if failed > 0 {
        let errors = result
            .points
            .iter()
            .enumerate()
            .filter_map(|(n, p)| p.result.as_ref().err().map(|e| format!("point {n}: {}", e.messages().join("; "))))
            .collect();
        return Err(Failure::Partial { failed, total, errors });
    }
    Ok(())
}

fn execute(sub: &Sub) -> Result<(), Failure> {
    let common = match sub {
        Sub::Simulate(c) | Sub::Memory(c) | Sub::Filter(c) | Sub::Design(c) => c,
        Sub::Bands { common, .. } | Sub::Params { common, .. } | Sub::Sweep { common, .. } => common,
    };
    let mut table = load(common)?;
    let mut sets = flag_overrides(sub);
    sets.extend(common.set.iter().cloned());
    apply_overrides(&mut table, &sets).map_err(Failure::Validation)?;

    let command = match sub {
        Sub::Simulate(_) => Command::Simulate,
        Sub::Memory(_) => Command::Memory,
        Sub::Bands { .. } => Command::Bands,
        Sub::Filter(_) => Command::Filter,
        Sub::Design(_) => Command::Design,
        Sub::Params { .. } => Command::Params,
        Sub::Sweep { command, .. } => {
            let name = match command {
                Some(c) => c.clone(),
                None => match table.get("command") {
                    Some(Value::String(s)) => s.clone(),
                    _ => {
                        return Err(Failure::Validation(vec![
                            "sweep needs --command or a top-level 'command' key".into(),
                        ]))
                    }
                },
            };
            name.parse().map_err(|e| Failure::Validation(vec![e]))?
        }
    };

    let mut axes_text = common.sweep.clone();
    if axes_text.is_empty() {
        if let Some(Value::Table(s)) = table.get("sweep") {
            if let Some(Value::Array(a)) = s.get("axes") {
                axes_text = a.iter().filter_map(|v| v.as_str().map(str::to_string)).collect();
            }
        }
    }
    if axes_text.is_empty() {
        if matches!(sub, Sub::Sweep { .. }) {
            return Err(Failure::Validation(vec!["sweep needs at least one --sweep axis".into()]));
        }
        return run_single(command, table, common);
    }
    let axes = axes_text
        .iter()
        .map(|a| Axis::parse(a))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Validation(vec![e]))?;
    table.remove("sweep");
    table.remove("command");
    run_sweep(command, table, axes, common)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let out = match &cli.command {
                Sub::Simulate(c) | Sub::Memory(c) | Sub::Filter(c) | Sub::Design(c) => &c.out,
                Sub::Bands { common, .. } | Sub::Params { common, .. } | Sub::Sweep { common, .. } => &common.out,
            };
            let mut record = json!({
                "status": "error",
                "kind": failure.kind(),
                "exit_code": failure.code(),
                "errors": failure.messages(),
            });
            if let Failure::Partial { failed, total, .. } = &failure {
                record["failed_points"] = json!(failed);
                record["total_points"] = json!(total);
            }
            for m in failure.messages() {
                eprintln!("error: {m}");
            }
            let text = serde_json::to_string_pretty(&record).unwrap_or_default();
            if fs::create_dir_all(out).is_ok() {
                let _ = fs::write(out.join("error.json"), text + "\n");
            }
            ExitCode::from(failure.code())
        }
    }
}
