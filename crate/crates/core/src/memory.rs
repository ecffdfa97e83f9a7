//! Write, store and read protocols for a pulse held in the synthetic lattice.

use std::fmt::Write as _;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::dynamics::{integrate, Frame, Scenario, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::lattice::{AuxCavities, Envelope, InputPulse, LatticeConfig, LossModel, PhaseSchedule, PhaseSegment, RampShape};
use crate::linalg::simpson;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemoryVariant {
    /// One auxiliary cavity: write at 0, hold at +pi/2 then -pi/2 (phase echo), read at -pi.
    PresetEcho,
    /// Two opposed auxiliary cavities: write at 0, freeze at pi/2 for as long as
    /// needed, read at pi.
    OnDemand,
}

impl MemoryVariant {
    pub fn name(self) -> &'static str {
        match self {
            MemoryVariant::PresetEcho => "preset-echo",
            MemoryVariant::OnDemand => "on-demand",
        }
    }

    pub fn aux(self) -> AuxCavities {
        match self {
            MemoryVariant::PresetEcho => AuxCavities::Single,
            MemoryVariant::OnDemand => AuxCavities::Opposed,
        }
    }
}

impl std::str::FromStr for MemoryVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "preset-echo" | "echo" => Ok(MemoryVariant::PresetEcho),
            "on-demand" => Ok(MemoryVariant::OnDemand),
            other => Err(Error::config(format!("unknown memory variant '{other}'"))),
        }
    }
}

/// Timing of a memory run. Every phase transition is centred on a plateau
/// boundary and lasts `ramp`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemoryPlan<T> {
    pub variant: MemoryVariant,
    /// Write-in duration.
    pub t_io: T,
    /// Hold duration: per half for the echo, total for on-demand.
    pub t_s: T,
    pub ramp: T,
    pub shape: RampShape,
}

impl<T: Real> MemoryPlan<T> {
    pub fn new(variant: MemoryVariant, t_io: T, t_s: T, ramp: T) -> Result<Self> {
        let plan = Self {
            variant,
            t_io,
            t_s,
            ramp,
            shape: RampShape::default(),
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_shape(mut self, shape: RampShape) -> Self {
        self.shape = shape;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_io > T::zero() && self.t_s > T::zero() && self.t_io.is_finite() && self.t_s.is_finite()) {
            return Err(Error::config("t_io and t_s must be positive and finite"));
        }
        if !(self.ramp >= T::zero() && self.ramp.is_finite()) {
            return Err(Error::config("ramp duration must be non-negative"));
        }
        let plateau = self.t_io.min(self.t_s);
        if self.ramp >= plateau {
            return Err(Error::RampOverlap {
                ramp: self.ramp.as_f64(),
                plateau: plateau.as_f64(),
            });
        }
        Ok(())
    }

    /// Ideal storage time: `t_io + 2 t_s` for the echo, `t_io + t_s` on demand.
    pub fn tau(&self) -> T {
        match self.variant {
            MemoryVariant::PresetEcho => self.t_io + T::lit(2.0) * self.t_s,
            MemoryVariant::OnDemand => self.t_io + self.t_s,
        }
    }

    /// Plateau boundaries paired with the phase reached after each.
    pub fn transitions(&self) -> Vec<(T, T)> {
        let pi = T::PI();
        let half = pi * T::lit(0.5);
        match self.variant {
            MemoryVariant::PresetEcho => vec![
                (self.t_io, half),
                (self.t_io + self.t_s, -half),
                (self.t_io + T::lit(2.0) * self.t_s, -pi),
            ],
            MemoryVariant::OnDemand => vec![(self.t_io, half), (self.t_io + self.t_s, pi)],
        }
    }

    /// Time at which the read-out ramp starts.
    pub fn read_start(&self) -> T {
        let last = self.transitions().last().expect("non-empty").0;
        last - self.ramp * T::lit(0.5)
    }

    pub fn build_schedule(&self) -> Result<PhaseSchedule<T>> {
        self.validate()?;
        let half_ramp = self.ramp * T::lit(0.5);
        let mut segments = vec![PhaseSegment::new(T::zero(), T::zero(), T::zero())];
        segments.extend(
            self.transitions()
                .into_iter()
                .map(|(b, phase)| PhaseSegment::new(b - half_ramp, phase, self.ramp)),
        );
        PhaseSchedule::new(segments, self.shape)
    }

    /// Nominal end of a run: read-out ramp complete, then `t_io` for emission
    /// plus ten pulse durations of margin.
    pub fn nominal_end(&self, pulse_duration: T) -> T {
        self.read_start() + self.ramp + self.t_io + T::lit(10.0) * pulse_duration
    }

    /// Lattice wide enough that ballistic spreading over `duration` does not
    /// reach the edges.
    pub fn lattice(&self, duration: T, kappa: T, omega0: T) -> Result<LatticeConfig<T>> {
        LatticeConfig::sized_for(duration, kappa, omega0, self.variant.aux())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignFlag<T> {
    pub pass: bool,
    /// Signed distance from the threshold; negative when the check fails.
    pub margin: T,
}

impl<T: Real> DesignFlag<T> {
    fn at_least(value: T, threshold: T) -> Self {
        Self {
            pass: value >= threshold,
            margin: value - threshold,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignFlags<T> {
    /// `2 kappa t_io >= 12 pi`.
    pub bandwidth: DesignFlag<T>,
    /// `l_max / M >= 2 kappa t_io`.
    pub emission: DesignFlag<T>,
    /// `t_p >= 2.5 / kappa`.
    pub pulse: DesignFlag<T>,
}

impl<T: Real> DesignFlags<T> {
    pub fn all_pass(&self) -> bool {
        self.bandwidth.pass && self.emission.pass && self.pulse.pass
    }
}

pub fn check_design<T: Real>(kappa: T, t_io: T, l_max: T, step_index: T, t_p: T) -> DesignFlags<T> {
    let product = T::lit(2.0) * kappa * t_io;
    DesignFlags {
        bandwidth: DesignFlag::at_least(product, T::lit(12.0) * T::PI()),
        emission: DesignFlag::at_least(l_max / step_index, product),
        pulse: DesignFlag::at_least(t_p, T::lit(2.5) / kappa),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemoryOptions<T> {
    /// Time step; `None` selects `0.01 / kappa`.
    pub dt: Option<T>,
    pub snapshot_every: usize,
    /// Residual stored energy, relative to its peak, below which the read-out is complete.
    pub residual: T,
    /// How many times the run may be lengthened by `t_io` to reach `residual`.
    pub max_extensions: usize,
}

impl<T: Real> Default for MemoryOptions<T> {
    fn default() -> Self {
        Self {
            dt: None,
            snapshot_every: 0,
            residual: T::lit(1e-4),
            max_extensions: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemoryReport<T> {
    pub variant: MemoryVariant,
    /// Read-out energy over input energy.
    pub efficiency: T,
    /// Normalized overlap of output and delayed input, maximized over the delay.
    pub fidelity: T,
    /// Delay at the cross-correlation peak.
    pub delay: T,
    pub ideal_delay: T,
    /// Largest `|j| M` whose population exceeded `1e-6` of the peak site population.
    pub peak_oam: i64,
    pub design: DesignFlags<T>,
    /// Echo only: population mismatch between end of write-in and start of read-out,
    /// relative to the stored total.
    pub echo_drift: Option<T>,
    /// On demand only: largest population change across the hold plateau, relative to the total.
    pub freeze_drift: Option<T>,
    pub read_window: (T, T),
    pub residual_stored: T,
    pub ledger_residual: T,
    pub boundary_fraction: T,
    pub sites: usize,
    pub dt: T,
    /// False when the lattice edges were reached.
    pub valid: bool,
    pub warnings: Vec<String>,
}

impl<T: Real> MemoryReport<T> {
    fn fields(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<T>| v.map_or_else(|| "nan".to_string(), |x| format!("{:.10e}", x));
        vec![
            ("variant", self.variant.name().to_string()),
            ("efficiency", format!("{:.10e}", self.efficiency)),
            ("fidelity", format!("{:.10e}", self.fidelity)),
            ("delay", format!("{:.10e}", self.delay)),
            ("ideal_delay", format!("{:.10e}", self.ideal_delay)),
            ("peak_oam", self.peak_oam.to_string()),
            ("bandwidth_ok", self.design.bandwidth.pass.to_string()),
            ("bandwidth_margin", format!("{:.6e}", self.design.bandwidth.margin)),
            ("emission_ok", self.design.emission.pass.to_string()),
            ("emission_margin", format!("{:.6e}", self.design.emission.margin)),
            ("pulse_ok", self.design.pulse.pass.to_string()),
            ("pulse_margin", format!("{:.6e}", self.design.pulse.margin)),
            ("echo_drift", opt(self.echo_drift)),
            ("freeze_drift", opt(self.freeze_drift)),
            ("read_start", format!("{:.10e}", self.read_window.0)),
            ("read_end", format!("{:.10e}", self.read_window.1)),
            ("residual_stored", format!("{:.6e}", self.residual_stored)),
            ("ledger_residual", format!("{:.6e}", self.ledger_residual)),
            ("boundary_fraction", format!("{:.6e}", self.boundary_fraction)),
            ("sites", self.sites.to_string()),
            ("dt", format!("{:.6e}", self.dt)),
            ("valid", self.valid.to_string()),
        ]
    }

    /// Flat `key=value` text record, one field per line.
    pub fn to_record(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.fields() {
            let _ = writeln!(s, "{k}={v}");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning={w}");
        }
        s
    }

    pub fn csv_header() -> String {
        let dummy = MemoryReport::<f64> {
            variant: MemoryVariant::PresetEcho,
            efficiency: 0.0,
            fidelity: 0.0,
            delay: 0.0,
            ideal_delay: 0.0,
            peak_oam: 0,
            design: check_design(1.0, 1.0, 1.0, 1.0, 1.0),
            echo_drift: None,
            freeze_drift: None,
            read_window: (0.0, 0.0),
            residual_stored: 0.0,
            ledger_residual: 0.0,
            boundary_fraction: 0.0,
            sites: 0,
            dt: 0.0,
            valid: true,
            warnings: Vec::new(),
        };
        dummy.fields().iter().map(|(k, _)| *k).collect::<Vec<_>>().join(",")
    }

    pub fn csv_row(&self) -> String {
        self.fields().into_iter().map(|(_, v)| v).collect::<Vec<_>>().join(",")
    }
}

/// Characteristic duration of the input: the Gaussian width, or `sqrt(2)` times
/// the rms duration of `|E|^2` for sampled envelopes (equal for a Gaussian).
pub fn pulse_duration<T: Real>(input: &InputPulse<T>) -> Result<T> {
    match &input.envelope {
        Envelope::Gaussian { width } => Ok(*width),
        Envelope::Continuous { .. } => Err(Error::config("memory runs need a finite input pulse")),
        Envelope::Sampled { start, step, values } => {
            let mut m = [T::zero(); 3];
            for (k, v) in values.iter().enumerate() {
                let t = *start + *step * T::from_usize(k).unwrap();
                let p = v.norm_sqr();
                m[0] += p;
                m[1] += p * t;
                m[2] += p * t * t;
            }
            if m[0] <= T::zero() {
                return Err(Error::config("input pulse is identically zero"));
            }
            let mean = m[1] / m[0];
            let var = (m[2] / m[0] - mean * mean).max(T::zero());
            Ok((T::lit(2.0) * var).sqrt())
        }
    }
}

/// Runs the protocol and scores the read-out.
pub fn run_memory<T: Real>(
    plan: &MemoryPlan<T>,
    lattice: &LatticeConfig<T>,
    losses: &LossModel<T>,
    input: &InputPulse<T>,
    opts: &MemoryOptions<T>,
) -> Result<MemoryReport<T>> {
    run_memory_with_trajectory(plan, lattice, losses, input, opts).map(|(r, _)| r)
}

/// As [`run_memory`], also returning the trajectory of the final run.
pub fn run_memory_with_trajectory<T: Real>(
    plan: &MemoryPlan<T>,
    lattice: &LatticeConfig<T>,
    losses: &LossModel<T>,
    input: &InputPulse<T>,
    opts: &MemoryOptions<T>,
) -> Result<(MemoryReport<T>, Trajectory<T>)> {
    plan.validate()?;
    lattice.validate()?;
    losses.validate()?;
    if lattice.aux != plan.variant.aux() {
        return Err(Error::config(format!(
            "{} needs {} auxiliary cavities, lattice has {}",
            plan.variant.name(),
            plan.variant.aux().count(),
            lattice.aux.count()
        )));
    }
    let t_p = pulse_duration(input)?;
    let total = input.energy();
    if !(total > T::zero()) {
        return Err(Error::config("input pulse carries no energy"));
    }
    let inside = input.energy_between(T::zero(), plan.t_io) / total;
    if inside < T::lit(0.999) {
        return Err(Error::PulseOutsideWindow { fraction: inside.as_f64() });
    }

    let schedule = plan.build_schedule()?;
    let kappa = lattice.kappa;
    let dt = opts.dt.unwrap_or_else(|| T::lit(0.01) / kappa);
    let probes = probe_times(plan, &schedule);
    let mut end = plan.nominal_end(t_p);
    let mut extensions = 0;
    let traj = loop {
        let grid = TimeGrid::new(T::zero(), end, dt)?;
        let scenario = Scenario::new(lattice.clone(), losses.clone(), schedule.clone(), input.clone(), grid)?
            .with_frame(Frame::Rotating)?
            .with_snapshot_every(opts.snapshot_every)
            .with_probes(probes.all());
        let traj = integrate(&scenario)?;
        let residual = traj.final_state.total() / traj.peak_stored.max(T::min_positive_value());
        if residual < opts.residual || extensions >= opts.max_extensions {
            break traj;
        }
        extensions += 1;
        end += plan.t_io;
    };

    let read_from = plan.read_start();
    let input_energy = traj.input_energy();
    let efficiency = traj.output_energy_between(read_from, end) / input_energy;
    let (fidelity, delay) = correlate(&traj, read_from);

    let peak_site = traj.site_peak.iter().copied().fold(T::zero(), T::max);
    let threshold = peak_site * T::lit(1e-6);
    let peak_oam = traj
        .site_peak
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > threshold)
        .map(|(idx, _)| lattice.oam(traj.site(idx)).abs())
        .max()
        .unwrap_or(0);

    let design = check_design(
        kappa,
        plan.t_io,
        T::from_i64(lattice.l_max()).unwrap(),
        T::from_u32(lattice.step_index).unwrap(),
        t_p,
    );

    let residual_stored = traj.final_state.total() / traj.peak_stored.max(T::min_positive_value());
    let mut warnings: Vec<String> = traj.warnings.iter().map(|w| w.to_string()).collect();
    if residual_stored >= opts.residual {
        warnings.push(format!(
            "read-out incomplete: {:.3e} of peak stored energy left at t = {}",
            residual_stored.as_f64(),
            end.as_f64()
        ));
    }
    let report = MemoryReport {
        variant: plan.variant,
        efficiency,
        fidelity,
        delay,
        ideal_delay: plan.tau(),
        peak_oam,
        design,
        echo_drift: probes.echo.map(|_| echo_drift(&traj)),
        freeze_drift: probes.freeze.as_ref().map(|_| freeze_drift(&traj)),
        read_window: (read_from, end),
        residual_stored,
        ledger_residual: traj.ledger_residual(),
        boundary_fraction: traj.boundary_fraction,
        sites: lattice.num_sites(),
        dt,
        valid: traj.warnings.is_empty(),
        warnings,
    };
    Ok((report, traj))
}

struct Probes<T> {
    /// End of write-in and start of read-out for the echo comparison.
    echo: Option<(T, T)>,
    /// Sample times across the frozen hold plateau.
    freeze: Option<Vec<T>>,
}

impl<T: Real> Probes<T> {
    fn all(&self) -> Vec<T> {
        let mut out = Vec::new();
        if let Some((a, b)) = self.echo {
            out.push(a);
            out.push(b);
        }
        if let Some(f) = &self.freeze {
            out.extend(f.iter().copied());
        }
        out
    }
}

fn probe_times<T: Real>(plan: &MemoryPlan<T>, schedule: &PhaseSchedule<T>) -> Probes<T> {
    let half_ramp = plan.ramp * T::lit(0.5);
    match plan.variant {
        MemoryVariant::PresetEcho => {
            // While the phase swings from +pi/2 to -pi/2 the band passes through
            // its unshifted position, so the packet keeps moving for an extra
            // phase area b = integral cos(phi) dt. The mirror time shifts by b.
            let mid = plan.t_io + plan.t_s;
            let n = 256;
            let b = if plan.ramp > T::zero() {
                let h = plan.ramp / T::from_usize(n).unwrap();
                let ys: Vec<T> = (0..=n)
                    .map(|k| schedule.phase_at(mid - half_ramp + h * T::from_usize(k).unwrap()).cos())
                    .collect();
                simpson(&ys, h)
            } else {
                T::zero()
            };
            let write_end = plan.t_io - half_ramp;
            let read_start = plan.t_io + T::lit(2.0) * plan.t_s + half_ramp + b;
            Probes {
                echo: Some((write_end, read_start)),
                freeze: None,
            }
        }
        MemoryVariant::OnDemand => {
            let from = plan.t_io + half_ramp;
            let to = plan.t_io + plan.t_s - half_ramp;
            let n = 16;
            let h = (to - from) / T::from_usize(n).unwrap();
            Probes {
                echo: None,
                freeze: Some((0..=n).map(|k| from + h * T::from_usize(k).unwrap()).collect()),
            }
        }
    }
}

fn population_distance<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |s, (x, y)| s + (x.norm_sqr() - y.norm_sqr()).abs())
}

fn echo_drift<T: Real>(traj: &Trajectory<T>) -> T {
    match traj.probes.as_slice() {
        [w, r, ..] => population_distance(&w.amplitudes, &r.amplitudes) / w.total().max(T::min_positive_value()),
        _ => T::nan(),
    }
}

fn freeze_drift<T: Real>(traj: &Trajectory<T>) -> T {
    let Some(first) = traj.probes.first() else {
        return T::nan();
    };
    let total = first.total().max(T::min_positive_value());
    traj.probes
        .iter()
        .map(|p| population_distance(&first.amplitudes, &p.amplitudes) / total)
        .fold(T::zero(), T::max)
}

/// Peak of `|integral E_out^*(t) E_in(t - tau) dt|^2`, normalized by both energies,
/// over all delays, together with the delay refined by a parabola through the peak.
fn correlate<T: Real>(traj: &Trajectory<T>, read_from: T) -> (T, T) {
    let k0 = traj.times.partition_point(|t| *t < read_from);
    let out = &traj.output[k0..];
    let inp = &traj.input[..];
    let len = (out.len() + inp.len()).next_power_of_two();
    let zero = Complex::new(T::zero(), T::zero());
    let mut x = vec![zero; len];
    let mut y = vec![zero; len];
    x[..out.len()].copy_from_slice(out);
    y[..inp.len()].copy_from_slice(inp);

    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    fwd.process(&mut x);
    fwd.process(&mut y);
    for (a, b) in x.iter_mut().zip(&y) {
        *a *= b.conj();
    }
    inv.process(&mut x);
    // x[d] / len = sum_n out[n + d] conj(in[n]), circular in d
    let scale = T::one() / T::from_usize(len).unwrap();
    let power: Vec<T> = x.iter().map(|v| (*v * scale).norm_sqr()).collect();
    let (best, peak) = power
        .iter()
        .copied()
        .enumerate()
        .fold((0, T::zero()), |acc, (i, p)| if p > acc.1 { (i, p) } else { acc });

    let e_out: T = out.iter().fold(T::zero(), |s, v| s + v.norm_sqr());
    let e_in: T = inp.iter().fold(T::zero(), |s, v| s + v.norm_sqr());
    if e_out <= T::zero() || e_in <= T::zero() {
        return (T::zero(), T::nan());
    }
    let fidelity = peak / (e_out * e_in);

    let left = power[(best + len - 1) % len];
    let right = power[(best + 1) % len];
    let denom = left - T::lit(2.0) * peak + right;
    let frac = if denom < T::zero() {
        T::lit(0.5) * (left - right) / denom
    } else {
        T::zero()
    };
    let lag = if best > len / 2 {
        T::from_usize(best).unwrap() - T::from_usize(len).unwrap()
    } else {
        T::from_usize(best).unwrap()
    };
    // both series share the time grid, so out[n + d] sits k0 + d steps after in[n]
    let delay = (T::from_usize(k0).unwrap() + lag + frac) * traj.dt;
    (fidelity, delay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn echo_schedule_plateaus() {
        let plan = MemoryPlan::new(MemoryVariant::PresetEcho, 20.0, 10.0, 1.0).unwrap();
        let s = plan.build_schedule().unwrap();
        assert_eq!(s.phase_at(10.0), 0.0);
        assert_eq!(s.phase_at(25.0), FRAC_PI_2);
        assert_eq!(s.phase_at(35.0), -FRAC_PI_2);
        assert_eq!(s.phase_at(60.0), -PI);
        assert!((s.phase_at(20.0) - PI / 4.0).abs() < 1e-15);
        assert_eq!(plan.tau(), 40.0);
        assert_eq!(plan.read_start(), 39.5);
    }

    #[test]
    fn on_demand_schedules_differ_only_in_hold() {
        let schedules: Vec<_> = [5.0, 20.0, 60.0]
            .iter()
            .map(|&ts| MemoryPlan::new(MemoryVariant::OnDemand, 20.0, ts, 1.0).unwrap().build_schedule().unwrap())
            .collect();
        for s in &schedules {
            let seg = s.segments();
            assert_eq!(seg.len(), 3);
            assert_eq!(seg[1].start, 19.5);
            assert_eq!(seg[1].phase, FRAC_PI_2);
            assert_eq!(seg[2].phase, PI);
        }
        assert_eq!(schedules[1].segments()[2].start - schedules[0].segments()[2].start, 15.0);
    }

    #[test]
    fn ramp_longer_than_plateau_is_rejected() {
        assert!(matches!(
            MemoryPlan::new(MemoryVariant::PresetEcho, 20.0, 1.0, 1.0),
            Err(Error::RampOverlap { .. })
        ));
        assert!(MemoryPlan::new(MemoryVariant::OnDemand, 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn design_checks() {
        let f = check_design(1.0, 20.0, 60.0, 1.0, 2.5);
        assert!(f.all_pass());
        assert!((f.bandwidth.margin - (40.0 - 12.0 * PI)).abs() < 1e-12);
        assert_eq!(f.emission.margin, 20.0);
        let f = check_design(1.0, 10.0, 60.0, 1.0, 2.5);
        assert!(!f.bandwidth.pass);
        let f = check_design(1.0, 20.0, 30.0, 1.0, 2.5);
        assert!(!f.emission.pass);
        assert_eq!(f.emission.margin, -10.0);
        // l_max is an OAM index, so a larger step index needs more of it
        assert!(!check_design(1.0, 20.0, 60.0, 2.0, 2.5).emission.pass);
        assert!(!check_design(1.0, 20.0, 60.0, 1.0, 2.0).pulse.pass);
    }

    #[test]
    fn pulse_must_fit_write_window() {
        let plan = MemoryPlan::new(MemoryVariant::PresetEcho, 20.0, 10.0, 1.0).unwrap();
        let lat = LatticeConfig::symmetric(40, 1.0, 0.0, AuxCavities::Single).unwrap();
        let input = InputPulse::gaussian(1.0, 2.5, 0.0, 3.0).unwrap();
        let err = run_memory(&plan, &lat, &LossModel::port_only(4.0), &input, &Default::default()).unwrap_err();
        assert!(matches!(err, Error::PulseOutsideWindow { fraction } if fraction < 0.999));
    }

    #[test]
    fn variant_must_match_lattice() {
        let plan = MemoryPlan::new(MemoryVariant::OnDemand, 20.0, 10.0, 1.0).unwrap();
        let lat = LatticeConfig::symmetric(40, 1.0, 0.0, AuxCavities::Single).unwrap();
        let input = InputPulse::gaussian(1.0, 2.5, 0.0, 10.0).unwrap();
        assert!(run_memory(&plan, &lat, &LossModel::port_only(4.0), &input, &Default::default()).is_err());
    }

    #[test]
    fn sampled_pulse_duration_matches_gaussian_width() {
        let w = 2.5;
        let values: Vec<Complex<f64>> = (0..=4000)
            .map(|k| {
                let t = k as f64 * 0.01;
                Complex::new((-(t - 20.0f64).powi(2) / (2.0 * w * w)).exp(), 0.0)
            })
            .collect();
        let p = InputPulse::sampled(0.0, 0.01, values, 0.0).unwrap();
        assert!((pulse_duration(&p).unwrap() - w).abs() < 1e-6);
    }

    #[test]
    fn report_record_and_row_agree() {
        let r = MemoryReport::<f64> {
            variant: MemoryVariant::OnDemand,
            efficiency: 0.5,
            fidelity: 0.9,
            delay: 30.0,
            ideal_delay: 30.0,
            peak_oam: 12,
            design: check_design(1.0, 20.0, 60.0, 1.0, 2.5),
            echo_drift: None,
            freeze_drift: Some(1e-5),
            read_window: (29.5, 80.0),
            residual_stored: 1e-6,
            ledger_residual: 1e-9,
            boundary_fraction: 0.0,
            sites: 81,
            dt: 0.01,
            valid: true,
            warnings: vec!["x".into()],
        };
        let rec = r.to_record();
        assert!(rec.contains("variant=on-demand\n"));
        assert!(rec.contains("echo_drift=nan\n"));
        assert!(rec.ends_with("warning=x\n"));
        let header = MemoryReport::<f64>::csv_header();
        assert_eq!(header.split(',').count(), r.csv_row().split(',').count());
        assert!(header.starts_with("variant,efficiency,fidelity,delay"));
    }
}
