//! Subcommands. Each one resolves its configuration in full, then runs in
//! dimensionless units (rates over `kappa`, times in `1/kappa`) and converts the
//! exported columns back to SI.

use std::fmt::Write as _;
use std::str::FromStr;

use synlat::dynamics::{integrate, Frame, Scenario, TimeGrid, Trajectory};
use synlat::filter::{cascade_metrics, design_two_stage, DesignTarget, FilterMetrics, FilterStage};
use synlat::lattice::{AuxCavities, InputPulse, LatticeConfig, LossModel, PhaseSchedule, PhaseSegment, RampShape};
use synlat::memory::{run_memory_with_trajectory, MemoryOptions, MemoryPlan, MemoryVariant};
use synlat::params::CavitySpec;
use synlat::spectrum::{band_structure, to_db, FrequencyGrid, ResponseCurve};

use crate::config::Resolver;
use crate::svg::{self, Plot, Series};
use crate::units::{format_si, Dim};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Memory,
    Bands,
    Filter,
    Design,
    Params,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Memory => "memory",
            Command::Bands => "bands",
            Command::Filter => "filter",
            Command::Design => "design",
            Command::Params => "params",
        }
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "simulate" => Ok(Command::Simulate),
            "memory" => Ok(Command::Memory),
            "bands" => Ok(Command::Bands),
            "filter" => Ok(Command::Filter),
            "design" => Ok(Command::Design),
            "params" => Ok(Command::Params),
            other => Err(format!(
                "unknown command '{other}' (expected simulate, memory, bands, filter, design or params)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CmdError {
    Validation(Vec<String>),
    Numerical(String),
}

impl CmdError {
    pub fn messages(&self) -> Vec<String> {
        match self {
            CmdError::Validation(v) => v.clone(),
            CmdError::Numerical(m) => vec![m.clone()],
        }
    }
}

impl From<synlat::Error> for CmdError {
    fn from(e: synlat::Error) -> Self {
        if e.is_validation() {
            CmdError::Validation(vec![e.to_string()])
        } else {
            CmdError::Numerical(e.to_string())
        }
    }
}

/// Files and scalar results of one run.
#[derive(Default)]
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub metrics: Vec<(String, String)>,
    pub summary: String,
}

impl Outcome {
    fn file(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }
}

/// Runs `command` against the resolver. `svg` controls plot generation.
pub fn run(command: Command, r: &mut Resolver, svg: bool) -> Result<Outcome, CmdError> {
    let requested = r.text("command", Some(command.name()));
    if requested != command.name() {
        r.error(format!(
            "config is for '{requested}' but '{}' was requested",
            command.name()
        ));
    }
    match command {
        Command::Simulate => simulate(r, svg),
        Command::Memory => memory(r, svg),
        Command::Bands => bands(r, svg),
        Command::Filter => filter(r, svg),
        Command::Design => design(r, svg),
        Command::Params => params(r),
    }
}

fn finish(r: &Resolver) -> Result<(), CmdError> {
    r.finish().map_err(CmdError::Validation)
}

fn e16(v: f64) -> String {
    format!("{v:.16e}")
}

struct Base {
    kappa: f64,
    /// `omega0 / kappa`.
    omega0: f64,
    aux: AuxCavities,
    step_index: u32,
    half_width: i64,
}

fn base(r: &mut Resolver, aux_default: i64) -> Base {
    let kappa = r.kappa();
    let omega0 = r.quantity("lattice.omega0", Dim::Rate, Some("0 kappa")) / kappa;
    let n = r.int("lattice.num_aux", Some(aux_default));
    let aux = AuxCavities::try_from(n).unwrap_or_else(|e| {
        r.error(format!("lattice.num_aux: {e}"));
        AuxCavities::Single
    });
    let m = r.int("lattice.step_index", Some(1));
    let step_index = u32::try_from(m).ok().filter(|m| *m >= 1).unwrap_or_else(|| {
        r.error(format!("lattice.step_index must be a positive integer, got {m}"));
        1
    });
    let half_width = r.int("lattice.half_width", Some(0));
    if half_width < 0 {
        r.error("lattice.half_width must be >= 0 (0 sizes the lattice automatically)");
    }
    Base {
        kappa,
        omega0,
        aux,
        step_index,
        half_width,
    }
}

impl Base {
    fn lattice(&self, duration: f64) -> Result<LatticeConfig<f64>, CmdError> {
        let lat = if self.half_width > 0 {
            LatticeConfig::symmetric(self.half_width, 1.0, self.omega0, self.aux)?
        } else {
            LatticeConfig::sized_for(duration, 1.0, self.omega0, self.aux)?
        };
        Ok(lat.with_step_index(self.step_index)?)
    }
}

/// Loss rates over `kappa`: `[port, site0_extra, decay_amplitude, decay_length, uniform]`.
fn losses(r: &mut Resolver, kappa: f64, port_default: Option<&str>) -> [f64; 5] {
    let port = match port_default {
        Some(d) => r.quantity("losses.port", Dim::Rate, Some(d)) / kappa,
        None => 0.0,
    };
    [
        port,
        r.quantity("losses.site0_extra", Dim::Rate, Some("0 kappa")) / kappa,
        r.quantity("losses.decay_amplitude", Dim::Rate, Some("0 kappa")) / kappa,
        r.float("losses.decay_length", Some(1.0)),
        r.quantity("losses.uniform", Dim::Rate, Some("0 kappa")) / kappa,
    ]
}

fn loss_model(l: [f64; 5]) -> Result<LossModel<f64>, CmdError> {
    Ok(LossModel::new(l[0], l[1], l[2], l[3], l[4])?)
}

fn shape(r: &mut Resolver, path: &str) -> RampShape {
    let text = r.text(path, Some(RampShape::default().name()));
    text.parse().unwrap_or_else(|e: synlat::Error| {
        r.error(format!("{path}: {e}"));
        RampShape::default()
    })
}

struct PulseSpec {
    amplitude: f64,
    width: f64,
    center: f64,
    detuning: f64,
}

/// Pulse parameters over `kappa`; `center_default` is in SI seconds.
fn pulse(r: &mut Resolver, kappa: f64, center_default: f64) -> PulseSpec {
    let center_default = format_si(center_default, Dim::Time);
    PulseSpec {
        amplitude: r.float("pulse.amplitude", Some(1.0)),
        width: r.quantity("pulse.width", Dim::Time, Some("2.5 /kappa")) * kappa,
        center: r.quantity("pulse.center", Dim::Time, Some(&center_default)) * kappa,
        detuning: r.quantity("pulse.detuning", Dim::Rate, Some("0 kappa")) / kappa,
    }
}

fn dt(r: &mut Resolver, kappa: f64) -> f64 {
    r.quantity("time.dt", Dim::Time, Some("0.01 /kappa")) * kappa
}

fn snapshot_every(r: &mut Resolver, default: i64) -> usize {
    let n = r.int("time.snapshot_every", Some(default));
    usize::try_from(n).unwrap_or_else(|_| {
        r.error("time.snapshot_every must be >= 0");
        0
    })
}

fn trajectory_csv(traj: &Trajectory<f64>, kappa: f64) -> String {
    let mut s = String::from("t,t_kappa,phase,re_in,im_in,re_out,im_out,stored,cum_in,cum_out,cum_loss\n");
    for k in 0..traj.len() {
        let t = traj.times[k];
        let row = [
            t / kappa,
            t,
            traj.phase[k],
            traj.input[k].re,
            traj.input[k].im,
            traj.output[k].re,
            traj.output[k].im,
            traj.stored[k],
            traj.ledger.input[k],
            traj.ledger.output[k],
            traj.ledger.loss[k],
        ];
        let _ = writeln!(s, "{}", row.map(e16).join(","));
    }
    s
}

fn populations_csv(traj: &Trajectory<f64>, lattice: &LatticeConfig<f64>, kappa: f64) -> String {
    let mut s = String::from("t,t_kappa");
    for idx in 0..traj.site_peak.len() {
        let _ = write!(s, ",l={}", lattice.oam(traj.site(idx)));
    }
    s.push('\n');
    for snap in &traj.snapshots {
        let _ = write!(s, "{},{}", e16(snap.time / kappa), e16(snap.time));
        for a in &snap.amplitudes {
            let _ = write!(s, ",{}", e16(a.norm_sqr()));
        }
        s.push('\n');
    }
    s
}

fn power_svg(traj: &Trajectory<f64>, title: &str) -> String {
    let pin: Vec<f64> = traj.input.iter().map(|e| e.norm_sqr()).collect();
    let pout: Vec<f64> = traj.output.iter().map(|e| e.norm_sqr()).collect();
    svg::line_plot(&Plot {
        title,
        x_label: "t kappa",
        y_label: "power (input energy units x kappa)",
        series: vec![
            Series { label: "|E_in|^2".into(), x: &traj.times, y: &pin },
            Series { label: "|E_out|^2".into(), x: &traj.times, y: &pout },
        ],
        y_floor: None,
    })
}

fn heatmap_svg(traj: &Trajectory<f64>, lattice: &LatticeConfig<f64>, title: &str) -> String {
    let x: Vec<f64> = traj.snapshots.iter().map(|s| s.time).collect();
    let y: Vec<f64> = (0..traj.site_peak.len()).map(|i| lattice.oam(traj.site(i)) as f64).collect();
    let values: Vec<Vec<f64>> = traj.snapshots.iter().map(|s| s.populations()).collect();
    svg::heatmap(title, &x, &y, &values, "t kappa", "OAM l")
}

fn simulate(r: &mut Resolver, svg: bool) -> Result<Outcome, CmdError> {
    let b = base(r, 1);
    let kappa = b.kappa;
    let l = losses(r, kappa, Some("4 kappa"));
    let p = pulse(r, kappa, 10.0 / kappa);
    let phases = r.quantity_list("schedule.phases", Dim::Phase, Some(&["0 rad"]));
    let starts: Vec<f64> = if phases.len() <= 1 && !r.has("schedule.starts") {
        vec![0.0]
    } else {
        r.quantity_list("schedule.starts", Dim::Time, None)
            .into_iter()
            .map(|t| t * kappa)
            .collect()
    };
    if starts.len() != phases.len() {
        r.error(format!(
            "schedule.starts has {} entries but schedule.phases has {}",
            starts.len(),
            phases.len()
        ));
    }
    let ramp = r.quantity("schedule.ramp", Dim::Time, Some("1 /kappa")) * kappa;
    let shape = shape(r, "schedule.shape");
    let dt = dt(r, kappa);
    let end = r.quantity("time.end", Dim::Time, Some("40 /kappa")) * kappa;
    let every = snapshot_every(r, 50);
    let frame = match r.text("time.frame", Some("rotating")).as_str() {
        "rotating" => Frame::Rotating,
        "lab" => Frame::Lab,
        other => {
            r.error(format!("time.frame must be 'rotating' or 'lab', got '{other}'"));
            Frame::Rotating
        }
    };
    finish(r)?;

    let lattice = b.lattice(end)?;
    let segments = starts
        .iter()
        .zip(&phases)
        .enumerate()
        .map(|(k, (s, ph))| PhaseSegment::new(*s, *ph, if k == 0 { 0.0 } else { ramp }))
        .collect();
    let schedule = PhaseSchedule::new(segments, shape)?;
    let input = InputPulse::gaussian(p.amplitude, p.width, b.omega0 + p.detuning, p.center)?;
    let scenario = Scenario::new(lattice.clone(), loss_model(l)?, schedule, input, TimeGrid::new(0.0, end, dt)?)?
        .with_frame(frame)?
        .with_snapshot_every(every);
    let traj = integrate(&scenario)?;

    let mut out = Outcome::default();
    let metrics = vec![
        ("input_energy", e16(traj.input_energy())),
        ("output_energy", e16(traj.output_energy())),
        ("stored_final", e16(*traj.stored.last().unwrap_or(&0.0))),
        ("peak_stored", e16(traj.peak_stored)),
        ("ledger_residual", format!("{:.6e}", traj.ledger_residual())),
        ("boundary_fraction", format!("{:.6e}", traj.boundary_fraction)),
        ("sites", lattice.num_sites().to_string()),
        ("steps", (traj.len() - 1).to_string()),
    ];
    out.metrics = metrics.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let mut report = format!("kappa={}\ntime_unit=1/kappa\n", format_si(kappa, Dim::Rate));
    for (k, v) in &out.metrics {
        let _ = writeln!(report, "{k}={v}");
    }
    for w in &traj.warnings {
        let _ = writeln!(report, "warning={w}");
    }
    out.summary = report.clone();
    out.file("report.txt", report);
    out.file("trajectory.csv", trajectory_csv(&traj, kappa));
    out.file("populations.csv", populations_csv(&traj, &lattice, kappa));
    if svg {
        out.file("power.svg", power_svg(&traj, "Input and output power"));
        out.file("heatmap.svg", heatmap_svg(&traj, &lattice, "Population across the OAM lattice"));
    }
    Ok(out)
}

fn memory(r: &mut Resolver, svg: bool) -> Result<Outcome, CmdError> {
    let kappa = r.kappa();
    let variant_text = r.text("memory.variant", Some(MemoryVariant::PresetEcho.name()));
    let variant = variant_text.parse::<MemoryVariant>().unwrap_or_else(|e| {
        r.error(format!("memory.variant: {e}"));
        MemoryVariant::PresetEcho
    });
    let b = base(r, variant.aux().count() as i64);
    let t_io = r.quantity("memory.t_io", Dim::Time, Some("20 /kappa")) * kappa;
    let t_s = r.quantity("memory.t_s", Dim::Time, Some("10 /kappa")) * kappa;
    let ramp = r.quantity("memory.ramp", Dim::Time, Some("1 /kappa")) * kappa;
    let shape = shape(r, "memory.shape");
    let l = losses(r, kappa, Some("4 kappa"));
    let p = pulse(r, kappa, t_io / 2.0 / kappa);
    let dt = dt(r, kappa);
    let every = snapshot_every(r, 100);
    finish(r)?;

    let plan = MemoryPlan::new(variant, t_io, t_s, ramp)?.with_shape(shape);
    let lattice = b.lattice(plan.nominal_end(p.width))?;
    let input = InputPulse::gaussian(p.amplitude, p.width, b.omega0 + p.detuning, p.center)?;
    let opts = MemoryOptions {
        dt: Some(dt),
        snapshot_every: every,
        ..Default::default()
    };
    let (report, traj) = run_memory_with_trajectory(&plan, &lattice, &loss_model(l)?, &input, &opts)?;

    let mut out = Outcome::default();
    let record = report.to_record();
    out.metrics = record
        .lines()
        .filter_map(|line| line.split_once('='))
        .filter(|(k, _)| *k != "warning")
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    out.metrics.push(("warnings".into(), report.warnings.join("; ")));
    let text = format!("kappa={}\ntime_unit=1/kappa\n{record}", format_si(kappa, Dim::Rate));
    out.summary = text.clone();
    out.file("report.txt", text);
    out.file("trace.csv", trajectory_csv(&traj, kappa));
    out.file("populations.csv", populations_csv(&traj, &lattice, kappa));
    if svg {
        let title = format!("{} memory: eta = {:.4}", variant.name(), report.efficiency);
        out.file("power.svg", power_svg(&traj, &title));
        out.file("heatmap.svg", heatmap_svg(&traj, &lattice, "Population across the OAM lattice"));
    }
    Ok(out)
}

fn bands(r: &mut Resolver, svg: bool) -> Result<Outcome, CmdError> {
    let kappa = r.kappa();
    let omega0 = r.quantity("lattice.omega0", Dim::Rate, Some("0 kappa"));
    let n = r.int("lattice.num_aux", Some(1));
    let aux = AuxCavities::try_from(n).unwrap_or_else(|e| {
        r.error(format!("lattice.num_aux: {e}"));
        AuxCavities::Single
    });
    let phis = r.quantity_list("bands.phi", Dim::Phase, Some(&["0 rad"]));
    let points = r.int("bands.points", Some(201));
    if points < 2 {
        r.error("bands.points must be at least 2");
    }
    finish(r)?;

    // The band is closed form; evaluate it directly in SI.
    let lattice = LatticeConfig::symmetric(1, kappa, omega0, aux)?;
    let mut csv = String::from("phi,k,omega,offset_kappa,group_velocity\n");
    let mut curves = Vec::new();
    for &phi in &phis {
        let band = band_structure(&lattice, phi, points as usize);
        for p in &band {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                e16(phi),
                e16(p.k),
                e16(p.omega),
                e16((p.omega - omega0) / kappa),
                e16(p.group_velocity)
            );
        }
        curves.push((
            phi,
            band.iter().map(|p| p.k).collect::<Vec<_>>(),
            band.iter().map(|p| (p.omega - omega0) / kappa).collect::<Vec<_>>(),
        ));
    }
    let mut out = Outcome::default();
    let width = curves
        .iter()
        .map(|(_, _, w)| w.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b)) - w.iter().fold(f64::INFINITY, |a, b| a.min(*b)))
        .fold(0.0, f64::max);
    out.metrics = vec![
        ("curves".into(), phis.len().to_string()),
        ("max_band_width_kappa".into(), e16(width)),
    ];
    out.summary = format!("wrote {} band(s) of {points} points\n", phis.len());
    out.file("bands.csv", csv);
    if svg {
        let series = curves
            .iter()
            .map(|(phi, k, w)| Series {
                label: format!("phi = {phi:.4}"),
                x: k,
                y: w,
            })
            .collect();
        out.file(
            "bands.svg",
            svg::line_plot(&Plot {
                title: &format!("Band structure, {} auxiliary cavit{}", aux.count(), if aux.count() == 1 { "y" } else { "ies" }),
                x_label: "Bloch wave number K",
                y_label: "(omega - omega0) / kappa",
                series,
                y_floor: None,
            }),
        );
    }
    Ok(out)
}

/// Intrinsic losses plus the frequency grid shared by `filter` and `design`.
fn filter_setup(r: &mut Resolver) -> (f64, f64, [f64; 5], f64, i64) {
    let kappa = r.kappa();
    let omega0 = r.quantity("lattice.omega0", Dim::Rate, Some("0 kappa")) / kappa;
    let l = losses(r, kappa, None);
    let span = r.quantity("filter.span", Dim::Rate, Some("3 kappa")) / kappa;
    let points = r.int("filter.points", Some(2001));
    if points < 3 {
        r.error("filter.points must be at least 3");
    }
    if span.is_finite() && span <= 0.0 {
        r.error("filter.span must be positive");
    }
    (kappa, omega0, l, span, points)
}

fn response_csv(curve: &ResponseCurve<f64>, omega0: f64, kappa: f64) -> String {
    let mut s = String::from("omega,offset_kappa,f,db\n");
    for (w, f) in curve.omega.iter().zip(&curve.f) {
        let _ = writeln!(s, "{},{},{},{}", e16(w * kappa), e16(w - omega0), e16(*f), e16(to_db(*f)));
    }
    s
}

fn response_svg(curve: &ResponseCurve<f64>, omega0: f64, title: &str) -> String {
    let x: Vec<f64> = curve.omega.iter().map(|w| w - omega0).collect();
    let y = curve.db();
    svg::line_plot(&Plot {
        title,
        x_label: "(omega - omega0) / kappa",
        y_label: "reflection (dB)",
        series: vec![Series { label: "f".into(), x: &x, y: &y }],
        y_floor: Some(-60.0),
    })
}

fn metric_pairs(m: &FilterMetrics<f64>) -> Vec<(String, String)> {
    m.to_record()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn stage_lines(stages: &[FilterStage<f64>], omega0: f64, kappa: f64) -> String {
    let mut s = String::new();
    for (n, st) in stages.iter().enumerate() {
        let _ = writeln!(
            s,
            "stage{n}_port_rate={} ({:.10e} kappa)",
            format_si(st.port_rate() * kappa, Dim::Rate),
            st.port_rate()
        );
        if let Ok((lo, _)) = synlat::filter::max_absorption_frequency(st) {
            let _ = writeln!(s, "stage{n}_target_offset={:.10e} kappa", lo - omega0);
        }
    }
    s
}

fn filter(r: &mut Resolver, svg: bool) -> Result<Outcome, CmdError> {
    let (kappa, omega0, l, span, points) = filter_setup(r);
    let targets = r.quantity_list("filter.targets", Dim::Rate, None);
    if r.errors().is_empty() && targets.is_empty() {
        r.error("filter.targets must list at least one offset");
    }
    finish(r)?;

    let intrinsic = loss_model(l)?;
    let stages = targets
        .iter()
        .map(|t| FilterStage::targeting(1.0, omega0, omega0 + t / kappa, &intrinsic))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = FrequencyGrid::new(omega0 - span, omega0 + span, points as usize)?;
    let (curve, metrics) = cascade_metrics(&stages, &grid)?;

    let mut out = Outcome::default();
    out.metrics = metric_pairs(&metrics);
    let mut text = format!("kappa={}\nfrequency_unit=kappa\nstages={}\n", format_si(kappa, Dim::Rate), stages.len());
    text.push_str(&stage_lines(&stages, omega0, kappa));
    text.push_str(&metrics.to_record());
    for note in &curve.meta.notes {
        let _ = writeln!(text, "note={note}");
    }
    out.summary = text.clone();
    out.file("metrics.txt", text);
    out.file("response.csv", response_csv(&curve, omega0, kappa));
    if svg {
        let title = format!("{}-stage stopband: shape factor {:.3}", stages.len(), metrics.shape_factor);
        out.file("response.svg", response_svg(&curve, omega0, &title));
    }
    Ok(out)
}

fn design(r: &mut Resolver, svg: bool) -> Result<Outcome, CmdError> {
    let (kappa, omega0, l, span, points) = filter_setup(r);
    let width = r.quantity("design.width_3db", Dim::Rate, None) / kappa;
    let rejection = r.float("design.rejection_db", Some(25.0));
    finish(r)?;

    let target = DesignTarget {
        kappa: 1.0,
        omega0,
        width_3db: width,
        rejection_db: rejection,
    };
    let grid = FrequencyGrid::new(omega0 - span, omega0 + span, points as usize)?;
    let d = design_two_stage(&target, &loss_model(l)?, &grid)?;

    let mut out = Outcome::default();
    out.metrics = d
        .offsets
        .iter()
        .enumerate()
        .map(|(n, o)| (format!("offset{n}_kappa"), e16(*o)))
        .chain(metric_pairs(&d.metrics))
        .collect();
    let mut text = format!("kappa={}\nfrequency_unit=kappa\n", format_si(kappa, Dim::Rate));
    for (n, o) in d.offsets.iter().enumerate() {
        let _ = writeln!(text, "offset{n}={o:.10e}");
    }
    text.push_str(&stage_lines(&d.stages, omega0, kappa));
    text.push_str(&d.metrics.to_record());
    out.summary = text.clone();
    out.file("design.txt", text);
    out.file("response.csv", response_csv(&d.curve, omega0, kappa));
    if svg {
        out.file("response.svg", response_svg(&d.curve, omega0, "Two-stage design"));
    }
    Ok(out)
}

fn params(r: &mut Resolver) -> Result<Outcome, CmdError> {
    let length = r.quantity("cavity.length", Dim::Length, None);
    let reflectivity = r.float("cavity.reflectivity", None);
    finish(r)?;

    let d = CavitySpec::new(length, reflectivity)?.derived();
    let mut out = Outcome::default();
    out.metrics = vec![
        ("fsr".into(), e16(d.fsr)),
        ("alpha".into(), e16(d.alpha)),
        ("kappa".into(), e16(d.kappa)),
        ("bandwidth".into(), e16(d.bandwidth)),
        ("pulse_duration".into(), e16(d.pulse_duration)),
        ("write_time".into(), e16(d.write_time)),
    ];
    let mut text = String::new();
    for (k, v) in &out.metrics {
        let _ = writeln!(text, "{k}={v}");
    }
    out.summary = format!("{d}\n");
    out.file("params.txt", text);
    Ok(out)
}
