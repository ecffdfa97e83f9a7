//! Time-domain integration of the driven coupled-mode equations
//!
//! ```text
//! da_j/dt = -i omega0 a_j + i kappa [e^{-i phi} a_{j+1} + e^{i phi} a_{j-1}]
//!           - (gamma_j / 2) a_j + delta_{j,0} sqrt(gamma_port) E_in(t)
//! E_out   = -E_in + sqrt(gamma_port) a_0
//! ```
//!
//! with classical RK4 on a fixed grid. The energy-flux ledger (input, output and
//! intrinsic-loss energy) is integrated as extra state components by the same
//! scheme, so its balance against the stored energy is exact up to the
//! integrator's truncation error.

use std::io::{self, Write};

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{AuxCavities, InputPulse, LatticeConfig, LossModel, PhaseSchedule};
use crate::scalar::Real;

/// Largest `dt * rate` accepted; RK4 is stable on the imaginary axis up to `2*sqrt(2)`.
const STABILITY_LIMIT: f64 = 2.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Frame {
    /// Frame rotating at `omega0`; the carrier of the resonance is removed.
    #[default]
    Rotating,
    Lab,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    pub start: T,
    pub end: T,
    pub dt: T,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(start: T, end: T, dt: T) -> Result<Self> {
        let g = Self { start, end, dt };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.end > self.start && self.end.is_finite() && self.start.is_finite()) {
            return Err(Error::config("t_end must be after t_start"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.end - self.start) / self.dt).round().to_usize().unwrap_or(0).max(1)
    }

    pub fn time(&self, k: usize) -> T {
        self.start + self.dt * T::from_usize(k).unwrap()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario<T> {
    pub lattice: LatticeConfig<T>,
    pub losses: LossModel<T>,
    pub schedule: PhaseSchedule<T>,
    pub input: InputPulse<T>,
    pub grid: TimeGrid<T>,
    pub frame: Frame,
    /// Store the full amplitude vector every this many steps (0 disables).
    pub snapshot_every: usize,
    /// Times at which amplitudes are recorded by linear interpolation between steps.
    pub probe_times: Vec<T>,
    /// Edge population, relative to peak stored energy, that triggers a warning.
    pub boundary_tolerance: T,
}

impl<T: Real> Scenario<T> {
    pub fn new(
        lattice: LatticeConfig<T>,
        losses: LossModel<T>,
        schedule: PhaseSchedule<T>,
        input: InputPulse<T>,
        grid: TimeGrid<T>,
    ) -> Result<Self> {
        let s = Self {
            lattice,
            losses,
            schedule,
            input,
            grid,
            frame: Frame::Rotating,
            snapshot_every: 0,
            probe_times: Vec::new(),
            boundary_tolerance: T::lit(1e-6),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_frame(mut self, frame: Frame) -> Result<Self> {
        self.frame = frame;
        self.validate()?;
        Ok(self)
    }

    pub fn with_snapshot_every(mut self, steps: usize) -> Self {
        self.snapshot_every = steps;
        self
    }

    pub fn with_probes(mut self, mut times: Vec<T>) -> Self {
        times.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        self.probe_times = times;
        self
    }

    pub fn with_dt(mut self, dt: T) -> Result<Self> {
        self.grid.dt = dt;
        self.validate()?;
        Ok(self)
    }

    /// Largest rate the time step has to resolve.
    pub fn stiffness(&self) -> T {
        let kappa = self.lattice.kappa;
        let gmax = self
            .lattice
            .sites()
            .map(|j| self.losses.total_rate(j))
            .fold(T::zero(), T::max);
        let frame = self.frame_frequency();
        let own = match self.frame {
            Frame::Lab => self.lattice.omega0.abs(),
            Frame::Rotating => T::zero(),
        };
        let drive = if self.input.is_zero() {
            T::zero()
        } else {
            (self.input.carrier - frame).abs()
        };
        T::lit(2.0) * kappa + T::lit(0.5) * gmax + own.max(drive)
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        self.losses.validate()?;
        self.grid.validate()?;
        if !self.boundary_tolerance.is_finite() || self.boundary_tolerance < T::zero() {
            return Err(Error::config("boundary tolerance must be non-negative"));
        }
        let rate = self.stiffness();
        if self.grid.dt * rate > T::lit(STABILITY_LIMIT) {
            return Err(Error::UnstableStep {
                dt: self.grid.dt.as_f64(),
                suggested: 1.0 / rate.as_f64(),
            });
        }
        Ok(())
    }

    fn frame_frequency(&self) -> T {
        match self.frame {
            Frame::Rotating => self.lattice.omega0,
            Frame::Lab => T::zero(),
        }
    }

    /// Input field at `t` in the simulation frame.
    pub fn input_field(&self, t: T) -> Complex<T> {
        self.input.field_at(t, self.frame_frequency())
    }

    /// Right-hand side of the equations of motion.
    pub fn derivative(&self, a: &[Complex<T>], t: T) -> Vec<Complex<T>> {
        let sys = System::new(self);
        let mut out = vec![Complex::new(T::zero(), T::zero()); a.len()];
        sys.rhs(a, t, &mut out);
        out
    }
}

/// Free-function form of [`Scenario::derivative`].
pub fn derivative<T: Real>(a: &[Complex<T>], t: T, scenario: &Scenario<T>) -> Vec<Complex<T>> {
    scenario.derivative(a, t)
}

/// Input-output relation at the port: `E_out = -E_in + sqrt(gamma_port) a_0`.
pub fn output_field<T: Real>(a0: Complex<T>, e_in: Complex<T>, port_rate: T) -> Complex<T> {
    -e_in + a0 * port_rate.sqrt()
}

/// Precomputed coefficients for one scenario.
struct System<'a, T> {
    scenario: &'a Scenario<T>,
    port: usize,
    half_rates: Vec<T>,
    intrinsic: Vec<T>,
    sqrt_port: T,
    own_freq: T,
}

impl<'a, T: Real> System<'a, T> {
    fn new(scenario: &'a Scenario<T>) -> Self {
        let lat = &scenario.lattice;
        let half = T::lit(0.5);
        Self {
            scenario,
            port: lat.port_index(),
            half_rates: lat.sites().map(|j| scenario.losses.total_rate(j) * half).collect(),
            intrinsic: scenario.losses.intrinsic_rates(lat),
            sqrt_port: scenario.losses.port_rate.sqrt(),
            own_freq: match scenario.frame {
                Frame::Lab => lat.omega0,
                Frame::Rotating => T::zero(),
            },
        }
    }

    /// Evaluates the derivative into `out`; returns the input field used.
    fn rhs(&self, a: &[Complex<T>], t: T, out: &mut [Complex<T>]) -> Complex<T> {
        let n = a.len();
        let phi = self.scenario.schedule.phase_at(t);
        let kappa = self.scenario.lattice.kappa;
        let i = Complex::new(T::zero(), T::one());
        // i * kappa * e^{-i phi} multiplies a_{j+1}; i * kappa * e^{+i phi} multiplies a_{j-1}
        let (up, down) = match self.scenario.lattice.aux {
            AuxCavities::Single => {
                let h = Complex::from_polar(kappa, -phi);
                (i * h, i * h.conj())
            }
            AuxCavities::Opposed => {
                let h = i * (kappa * phi.cos());
                (h, h)
            }
        };
        let onsite = Complex::new(T::zero(), -self.own_freq);
        for j in 0..n {
            let mut d = a[j] * (onsite - self.half_rates[j]);
            if j + 1 < n {
                d += up * a[j + 1];
            }
            if j > 0 {
                d += down * a[j - 1];
            }
            out[j] = d;
        }
        let e_in = self.scenario.input_field(t);
        if n > 0 {
            out[self.port] += e_in * self.sqrt_port;
        }
        e_in
    }

    /// Instantaneous flux rates (input power, output power, intrinsic loss power).
    fn flux(&self, a: &[Complex<T>], e_in: Complex<T>) -> [T; 3] {
        let e_out = -e_in + a[self.port] * self.sqrt_port;
        let loss = a
            .iter()
            .zip(&self.intrinsic)
            .fold(T::zero(), |s, (v, g)| s + *g * v.norm_sqr());
        [e_in.norm_sqr(), e_out.norm_sqr(), loss]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    pub time: T,
    pub amplitudes: Vec<Complex<T>>,
}

impl<T: Real> Snapshot<T> {
    pub fn populations(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn total(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |s, a| s + a.norm_sqr())
    }
}

/// Cumulative energies since the start of the run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FluxLedger<T> {
    pub input: Vec<T>,
    pub output: Vec<T>,
    pub loss: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// Population at a lattice edge exceeded the tolerance; the truncated lattice
    /// no longer represents an unbounded one.
    BoundaryContamination { fraction: f64, tolerance: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::BoundaryContamination { fraction, tolerance } => write!(
                f,
                "boundary contamination: edge population {fraction:.3e} of peak exceeds {tolerance:.1e}"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub j_min: i64,
    pub dt: T,
    pub times: Vec<T>,
    pub phase: Vec<T>,
    pub input: Vec<Complex<T>>,
    pub output: Vec<Complex<T>>,
    pub stored: Vec<T>,
    pub ledger: FluxLedger<T>,
    pub snapshots: Vec<Snapshot<T>>,
    pub probes: Vec<Snapshot<T>>,
    pub final_state: Snapshot<T>,
    /// Largest population reached by each site over the run.
    pub site_peak: Vec<T>,
    pub peak_stored: T,
    /// Largest edge population relative to `peak_stored`.
    pub boundary_fraction: T,
    pub warnings: Vec<Warning>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn site(&self, index: usize) -> i64 {
        self.j_min + index as i64
    }

    pub fn index_of_site(&self, j: i64) -> Option<usize> {
        let idx = j - self.j_min;
        (idx >= 0 && (idx as usize) < self.site_peak.len()).then_some(idx as usize)
    }

    pub fn is_contaminated(&self) -> bool {
        !self.warnings.is_empty()
    }

    fn trapezoid(&self, values: impl Fn(usize) -> T, from: T, to: T) -> T {
        let half = T::lit(0.5);
        let mut acc = T::zero();
        for k in 1..self.times.len() {
            let (t0, t1) = (self.times[k - 1], self.times[k]);
            if t0 >= from && t1 <= to {
                acc += (values(k - 1) + values(k)) * half * (t1 - t0);
            }
        }
        acc
    }

    pub fn input_energy(&self) -> T {
        self.trapezoid(|k| self.input[k].norm_sqr(), T::neg_infinity(), T::infinity())
    }

    pub fn output_energy(&self) -> T {
        self.output_energy_between(T::neg_infinity(), T::infinity())
    }

    pub fn output_energy_between(&self, from: T, to: T) -> T {
        self.trapezoid(|k| self.output[k].norm_sqr(), from, to)
    }

    /// Largest violation of the energy balance
    /// `stored(t) - stored(0) = in(t) - out(t) - loss(t)`, relative to the
    /// larger of the total input energy and the peak stored energy.
    pub fn ledger_residual(&self) -> T {
        let scale = self
            .ledger
            .input
            .last()
            .copied()
            .unwrap_or_else(T::zero)
            .max(self.peak_stored)
            .max(T::min_positive_value());
        let s0 = self.stored.first().copied().unwrap_or_else(T::zero);
        (0..self.len())
            .map(|k| {
                let flux = self.ledger.input[k] - self.ledger.output[k] - self.ledger.loss[k];
                (self.stored[k] - s0 - flux).abs()
            })
            .fold(T::zero(), T::max)
            / scale
    }

    /// Writes the per-step time series as CSV.
    pub fn write_csv<W: Write>(&self, mut w: W, kappa: T) -> io::Result<()> {
        writeln!(
            w,
            "t,t_kappa,phase,re_in,im_in,re_out,im_out,stored,cum_in,cum_out,cum_loss"
        )?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[k],
                self.times[k] * kappa,
                self.phase[k],
                self.input[k].re,
                self.input[k].im,
                self.output[k].re,
                self.output[k].im,
                self.stored[k],
                self.ledger.input[k],
                self.ledger.output[k],
                self.ledger.loss[k],
            )?;
        }
        Ok(())
    }

    /// Writes the snapshot populations as a dense time-by-site table.
    pub fn write_population_table<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.site_peak.len();
        write!(w, "t")?;
        for idx in 0..n {
            write!(w, ",j={}", self.site(idx))?;
        }
        writeln!(w)?;
        for snap in &self.snapshots {
            write!(w, "{:.16e}", snap.time)?;
            for a in &snap.amplitudes {
                write!(w, ",{:.16e}", a.norm_sqr())?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn axpy<T: Real>(out: &mut [Complex<T>], base: &[Complex<T>], k: &[Complex<T>], h: T) {
    for ((o, b), d) in out.iter_mut().zip(base).zip(k) {
        *o = *b + *d * h;
    }
}

/// Integrates the scenario with classical fixed-step RK4.
pub fn integrate<T: Real>(scenario: &Scenario<T>) -> Result<Trajectory<T>> {
    scenario.validate()?;
    let sys = System::new(scenario);
    let n = scenario.lattice.num_sites();
    let grid = scenario.grid;
    let steps = grid.steps();
    let dt = grid.dt;
    let half_dt = dt * T::lit(0.5);
    let sixth = dt / T::lit(6.0);
    let zero = Complex::new(T::zero(), T::zero());

    let mut a = vec![zero; n];
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut tmp = vec![zero; n];
    let mut ledger = [T::zero(); 3];

    let cap = steps + 1;
    let mut traj = Trajectory {
        j_min: scenario.lattice.j_min,
        dt,
        times: Vec::with_capacity(cap),
        phase: Vec::with_capacity(cap),
        input: Vec::with_capacity(cap),
        output: Vec::with_capacity(cap),
        stored: Vec::with_capacity(cap),
        ledger: FluxLedger {
            input: Vec::with_capacity(cap),
            output: Vec::with_capacity(cap),
            loss: Vec::with_capacity(cap),
        },
        snapshots: Vec::new(),
        probes: Vec::new(),
        final_state: Snapshot {
            time: grid.start,
            amplitudes: Vec::new(),
        },
        site_peak: vec![T::zero(); n],
        peak_stored: T::zero(),
        boundary_fraction: T::zero(),
        warnings: Vec::new(),
    };

    let mut probes = scenario.probe_times.iter().copied().peekable();
    while probes.peek().is_some_and(|&p| p < grid.start) {
        probes.next();
    }

    let record = |traj: &mut Trajectory<T>, k: usize, t: T, a: &[Complex<T>], ledger: &[T; 3]| {
        let e_in = scenario.input_field(t);
        let e_out = output_field(a[sys.port], e_in, scenario.losses.port_rate);
        let mut stored = T::zero();
        for (peak, v) in traj.site_peak.iter_mut().zip(a) {
            let p = v.norm_sqr();
            stored += p;
            if p > *peak {
                *peak = p;
            }
        }
        traj.peak_stored = traj.peak_stored.max(stored);
        traj.times.push(t);
        traj.phase.push(scenario.schedule.phase_at(t));
        traj.input.push(e_in);
        traj.output.push(e_out);
        traj.stored.push(stored);
        traj.ledger.input.push(ledger[0]);
        traj.ledger.output.push(ledger[1]);
        traj.ledger.loss.push(ledger[2]);
        if scenario.snapshot_every > 0 && k % scenario.snapshot_every == 0 {
            traj.snapshots.push(Snapshot {
                time: t,
                amplitudes: a.to_vec(),
            });
        }
        stored
    };

    record(&mut traj, 0, grid.start, &a, &ledger);
    let mut prev = a.clone();
    for step in 0..steps {
        let t = grid.time(step);
        let e1 = sys.rhs(&a, t, &mut k1);
        let f1 = sys.flux(&a, e1);
        axpy(&mut tmp, &a, &k1, half_dt);
        let e2 = sys.rhs(&tmp, t + half_dt, &mut k2);
        let f2 = sys.flux(&tmp, e2);
        axpy(&mut tmp, &a, &k2, half_dt);
        let e3 = sys.rhs(&tmp, t + half_dt, &mut k3);
        let f3 = sys.flux(&tmp, e3);
        axpy(&mut tmp, &a, &k3, dt);
        let e4 = sys.rhs(&tmp, t + dt, &mut k4);
        let f4 = sys.flux(&tmp, e4);

        prev.copy_from_slice(&a);
        let two = T::lit(2.0);
        for j in 0..n {
            a[j] += (k1[j] + (k2[j] + k3[j]) * two + k4[j]) * sixth;
        }
        for c in 0..3 {
            ledger[c] += (f1[c] + (f2[c] + f3[c]) * two + f4[c]) * sixth;
        }

        let t_next = grid.time(step + 1);
        let stored = record(&mut traj, step + 1, t_next, &a, &ledger);
        if !stored.is_finite() {
            return Err(Error::UnstableStep {
                dt: dt.as_f64(),
                suggested: 0.5 * dt.as_f64(),
            });
        }
        while let Some(&p) = probes.peek() {
            if p > t_next {
                break;
            }
            let w = (p - t) / dt;
            let amplitudes = prev
                .iter()
                .zip(&a)
                .map(|(x, y)| *x * (T::one() - w) + *y * w)
                .collect();
            traj.probes.push(Snapshot { time: p, amplitudes });
            probes.next();
        }
    }

    traj.final_state = Snapshot {
        time: grid.time(steps),
        amplitudes: a,
    };
    if traj.peak_stored > T::zero() && n > 0 {
        let edge = traj.site_peak[0].max(traj.site_peak[n - 1]);
        traj.boundary_fraction = edge / traj.peak_stored;
        if traj.boundary_fraction > scenario.boundary_tolerance {
            traj.warnings.push(Warning::BoundaryContamination {
                fraction: traj.boundary_fraction.as_f64(),
                tolerance: scenario.boundary_tolerance.as_f64(),
            });
        }
    }
    Ok(traj)
}

/// Integrates independent scenarios in parallel; results keep the input order.
pub fn integrate_many<T: Real>(scenarios: &[Scenario<T>]) -> Vec<Result<Trajectory<T>>> {
    scenarios.par_iter().map(integrate).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{PhaseSegment, RampShape};
    use std::f64::consts::PI;

    type C = Complex<f64>;

    fn scenario(half: i64, losses: LossModel<f64>, input: InputPulse<f64>, t_end: f64, dt: f64) -> Scenario<f64> {
        Scenario::new(
            LatticeConfig::symmetric(half, 1.0, 0.0, AuxCavities::Single).unwrap(),
            losses,
            PhaseSchedule::constant(0.0),
            input,
            TimeGrid::new(0.0, t_end, dt).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn source_term_only() {
        let cw = InputPulse::continuous(1.0, 0.0, -10.0, 1.0).unwrap();
        let s = scenario(3, LossModel::port_only(4.0), cw, 1.0, 1e-3);
        let d = s.derivative(&[C::new(0.0, 0.0); 7], 0.0);
        for (idx, v) in d.iter().enumerate() {
            if idx == 3 {
                assert!((v - C::new(2.0, 0.0)).norm() < 1e-15);
            } else {
                assert_eq!(*v, C::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn single_site_pure_decay() {
        let s = Scenario::new(
            LatticeConfig::new(0, 0, 1.0, 5.0, AuxCavities::Single).unwrap(),
            LossModel::port_only(3.0),
            PhaseSchedule::constant(0.0),
            InputPulse::none(),
            TimeGrid::new(0.0, 1.0, 1e-3).unwrap(),
        )
        .unwrap();
        let d = derivative(&[C::new(1.0, 0.0)], 0.3, &s);
        assert!((d[0] - C::new(-1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn plane_wave_matches_band() {
        // interior sites of a lossless lab-frame lattice see -i(omega0 - 2 kappa cos K) a_j
        let (kappa, omega0, k) = (0.7, 0.3, 0.9);
        let s = Scenario::new(
            LatticeConfig::symmetric(6, kappa, omega0, AuxCavities::Single).unwrap(),
            LossModel::port_only(0.0),
            PhaseSchedule::constant(0.0),
            InputPulse::none(),
            TimeGrid::new(0.0, 1.0, 1e-3).unwrap(),
        )
        .unwrap()
        .with_frame(Frame::Lab)
        .unwrap();
        let a: Vec<C> = (-6..=6).map(|j| C::from_polar(1.0, k * j as f64)).collect();
        let d = s.derivative(&a, 0.0);
        let lambda = C::new(0.0, -(omega0 - 2.0 * kappa * f64::cos(k)));
        for idx in 1..12 {
            assert!((d[idx] - lambda * a[idx]).norm() < 1e-14, "site {idx}");
        }
    }

    #[test]
    fn output_field_convention() {
        assert_eq!(output_field(C::new(0.0, 0.0), C::new(1.0, 0.0), 4.0), C::new(-1.0, 0.0));
        let a0 = C::new(0.3, -2.0);
        assert_eq!(output_field(a0, C::new(0.5, 0.5), 0.0), C::new(-0.5, -0.5));
    }

    #[test]
    fn single_mode_cw_reflection_phase_flips() {
        // steady state of da/dt = -i delta a - (g/2) a + sqrt(g) E:
        // E_out / E_in = (g/2 - i delta) / (g/2 + i delta)
        let g: f64 = 2.0;
        let ratio = |delta: f64| {
            let a = C::new(g.sqrt(), 0.0) / C::new(g / 2.0, delta);
            output_field(a, C::new(1.0, 0.0), g)
        };
        for delta in [-5.0, -1.0, 0.0, 0.3, 4.0] {
            assert!((ratio(delta).norm() - 1.0).abs() < 1e-14);
        }
        assert!((ratio(0.0) - C::new(1.0, 0.0)).norm() < 1e-14);
        assert!((ratio(1e6) + C::new(1.0, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn zero_input_stays_zero() {
        let s = scenario(10, LossModel::port_only(4.0), InputPulse::none(), 5.0, 1e-2);
        let tr = integrate(&s).unwrap();
        assert!(tr.stored.iter().all(|v| *v == 0.0));
        assert!(tr.output.iter().all(|v| v.norm() == 0.0));
        assert!(tr.warnings.is_empty());
    }

    #[test]
    fn unstable_step_is_rejected_with_suggestion() {
        let err = Scenario::new(
            LatticeConfig::symmetric(3, 1.0, 0.0, AuxCavities::Single).unwrap(),
            LossModel::port_only(4.0),
            PhaseSchedule::constant(0.0),
            InputPulse::none(),
            TimeGrid::new(0.0, 10.0, 1.0).unwrap(),
        )
        .unwrap_err();
        match err {
            Error::UnstableStep { suggested, .. } => assert!(suggested > 0.0 && suggested < 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn boundary_contamination_is_flagged() {
        let p = InputPulse::gaussian(1.0, 1.0, 0.0, 3.0).unwrap();
        let s = scenario(4, LossModel::port_only(4.0), p, 20.0, 1e-2);
        let tr = integrate(&s).unwrap();
        assert!(tr.is_contaminated());
        assert!(tr.boundary_fraction > 1e-3);
    }

    #[test]
    fn probes_interpolate_between_steps() {
        let p = InputPulse::gaussian(1.0, 1.0, 0.0, 3.0).unwrap();
        let s = scenario(20, LossModel::port_only(4.0), p, 6.0, 1e-2)
            .with_snapshot_every(1)
            .with_probes(vec![3.0, 3.005]);
        let tr = integrate(&s).unwrap();
        assert_eq!(tr.probes.len(), 2);
        let snap = tr.snapshots.iter().find(|s| (s.time - 3.0).abs() < 1e-12).unwrap();
        for (x, y) in tr.probes[0].amplitudes.iter().zip(&snap.amplitudes) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_ramp_recorded() {
        let sched = PhaseSchedule::new(
            vec![PhaseSegment::new(0.0, 0.0, 0.0), PhaseSegment::new(1.0, PI, 1.0)],
            RampShape::Linear,
        )
        .unwrap();
        let mut s = scenario(2, LossModel::port_only(1.0), InputPulse::none(), 3.0, 0.5);
        s.schedule = sched;
        let tr = integrate(&s).unwrap();
        assert_eq!(tr.phase, vec![0.0, 0.0, 0.0, PI / 2.0, PI, PI, PI]);
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let p = InputPulse::gaussian(1.0, 1.0, 0.0, 1.0).unwrap();
        let s = scenario(5, LossModel::port_only(4.0), p, 1.0, 0.25).with_snapshot_every(2);
        let tr = integrate(&s).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf, 1.0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 5);
        assert!(text.starts_with("t,t_kappa,phase"));
        let mut buf = Vec::new();
        tr.write_population_table(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 3);
        assert!(text.lines().next().unwrap().ends_with(",j=5"));
    }

    #[test]
    fn runs_in_single_precision() {
        let s = Scenario::<f32>::new(
            LatticeConfig::symmetric(30, 1.0, 0.0, AuxCavities::Single).unwrap(),
            LossModel::port_only(4.0),
            PhaseSchedule::constant(0.0),
            InputPulse::gaussian(1.0, 2.5, 0.0, 10.0).unwrap(),
            TimeGrid::new(0.0, 20.0, 1e-2).unwrap(),
        )
        .unwrap();
        let tr = integrate(&s).unwrap();
        let absorbed = 1.0 - tr.output_energy() / tr.input_energy();
        assert!(absorbed > 0.99, "absorbed {absorbed}");
    }
}
