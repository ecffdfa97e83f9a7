//! Lattice data model: geometry, phase schedules, loss rates, input pulses and the
//! coupling matrix.
//!
//! Site `j` of the synthetic lattice is the cavity mode carrying OAM `l = j * M`.
//! Arrays are indexed by site offset `j - j_min`, so the port site `j = 0` lives at
//! index `-j_min`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;
use crate::scalar::Real;

/// Number of auxiliary cavities providing the inter-mode hopping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum AuxCavities {
    /// One auxiliary cavity: hopping `kappa * exp(-i phi)`.
    #[default]
    Single,
    /// Two auxiliary cavities with opposite phase imbalances and strength
    /// `kappa / 2` each: hopping `kappa * cos(phi)`.
    Opposed,
}

impl AuxCavities {
    pub fn count(self) -> u8 {
        match self {
            AuxCavities::Single => 1,
            AuxCavities::Opposed => 2,
        }
    }
}

impl TryFrom<i64> for AuxCavities {
    type Error = Error;
    fn try_from(n: i64) -> Result<Self> {
        match n {
            1 => Ok(AuxCavities::Single),
            2 => Ok(AuxCavities::Opposed),
            other => Err(Error::config(format!("num_aux must be 1 or 2, got {other}"))),
        }
    }
}

impl fmt::Display for AuxCavities {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeConfig<T> {
    pub j_min: i64,
    pub j_max: i64,
    /// Tunneling rate between neighbouring sites.
    pub kappa: T,
    /// Resonance frequency of the main cavity.
    pub omega0: T,
    pub aux: AuxCavities,
    /// OAM step imparted per pass; site `j` carries `l = j * step_index`.
    pub step_index: u32,
}

impl<T: Real> LatticeConfig<T> {
    pub fn new(j_min: i64, j_max: i64, kappa: T, omega0: T, aux: AuxCavities) -> Result<Self> {
        let cfg = Self {
            j_min,
            j_max,
            kappa,
            omega0,
            aux,
            step_index: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Symmetric lattice `-half_width ..= half_width`.
    pub fn symmetric(half_width: i64, kappa: T, omega0: T, aux: AuxCavities) -> Result<Self> {
        Self::new(-half_width, half_width, kappa, omega0, aux)
    }

    /// Symmetric lattice wide enough that a disturbance launched at the port
    /// cannot reach the edge within `duration`: the fastest group velocity is
    /// `2 kappa` sites per unit time.
    pub fn sized_for(duration: T, kappa: T, omega0: T, aux: AuxCavities) -> Result<Self> {
        if !(duration.is_finite() && duration >= T::zero()) {
            return Err(Error::config("duration must be finite and non-negative"));
        }
        let reach = (T::lit(2.0) * kappa * duration).ceil().to_i64().unwrap_or(i64::MAX / 4);
        Self::symmetric(reach + 16, kappa, omega0, aux)
    }

    pub fn with_step_index(mut self, m: u32) -> Result<Self> {
        self.step_index = m;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j_min <= 0 && 0 <= self.j_max) {
            return Err(Error::config(format!(
                "lattice range [{}, {}] must contain the port site 0",
                self.j_min, self.j_max
            )));
        }
        if !(self.kappa > T::zero() && self.kappa.is_finite()) {
            return Err(Error::config(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !self.omega0.is_finite() {
            return Err(Error::config("omega0 must be finite"));
        }
        if self.step_index == 0 {
            return Err(Error::config("step index M must be at least 1"));
        }
        Ok(())
    }

    pub fn num_sites(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn port_index(&self) -> usize {
        (-self.j_min) as usize
    }

    pub fn index_of(&self, j: i64) -> Option<usize> {
        (self.j_min..=self.j_max)
            .contains(&j)
            .then(|| (j - self.j_min) as usize)
    }

    pub fn site(&self, index: usize) -> i64 {
        self.j_min + index as i64
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.j_min..=self.j_max
    }

    pub fn oam(&self, j: i64) -> i64 {
        j * self.step_index as i64
    }

    /// Largest OAM magnitude represented on the lattice.
    pub fn l_max(&self) -> i64 {
        self.j_min.abs().max(self.j_max) * self.step_index as i64
    }

    /// Hopping amplitude on the super-diagonal, `H[j][j+1]`.
    pub fn hopping(&self, phi: T) -> Complex<T> {
        match self.aux {
            AuxCavities::Single => Complex::from_polar(self.kappa, -phi),
            AuxCavities::Opposed => Complex::new(self.kappa * phi.cos(), T::zero()),
        }
    }

    /// Copy of the lattice with doubled extent, used for convergence checks.
    pub fn doubled(&self) -> Self {
        Self {
            j_min: 2 * self.j_min.min(-1),
            j_max: 2 * self.j_max.max(1),
            ..self.clone()
        }
    }
}

/// Shape of the transition between two phase plateaus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RampShape {
    Linear,
    /// `(1 - cos(pi s)) / 2`.
    #[default]
    RaisedCosine,
    /// Quintic `6s^5 - 15s^4 + 10s^3`, continuous up to the second derivative.
    Smootherstep,
}

impl RampShape {
    /// Fraction of the transition completed at normalized time `s` in `[0, 1]`.
    pub fn weight<T: Real>(self, s: T) -> T {
        let s = s.max(T::zero()).min(T::one());
        match self {
            RampShape::Linear => s,
            RampShape::RaisedCosine => (T::one() - (T::PI() * s).cos()) * T::lit(0.5),
            RampShape::Smootherstep => {
                s * s * s * (s * (s * T::lit(6.0) - T::lit(15.0)) + T::lit(10.0))
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RampShape::Linear => "linear",
            RampShape::RaisedCosine => "raised-cosine",
            RampShape::Smootherstep => "smootherstep",
        }
    }
}

impl std::str::FromStr for RampShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(RampShape::Linear),
            "raised-cosine" | "cosine" => Ok(RampShape::RaisedCosine),
            "smootherstep" => Ok(RampShape::Smootherstep),
            other => Err(Error::config(format!("unknown ramp shape '{other}'"))),
        }
    }
}

/// One plateau of a phase schedule. The transition from the previous plateau
/// starts at `start` and lasts `ramp`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSegment<T> {
    pub start: T,
    pub phase: T,
    pub ramp: T,
}

impl<T> PhaseSegment<T> {
    pub fn new(start: T, phase: T, ramp: T) -> Self {
        Self { start, phase, ramp }
    }
}

/// Piecewise-smooth time profile of the phase imbalance.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSchedule<T> {
    segments: Vec<PhaseSegment<T>>,
    shape: RampShape,
}

impl<T: Real> PhaseSchedule<T> {
    pub fn new(segments: Vec<PhaseSegment<T>>, shape: RampShape) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::config("phase schedule has no segments"));
        }
        for (k, seg) in segments.iter().enumerate() {
            if !(seg.start.is_finite() && seg.phase.is_finite()) {
                return Err(Error::config(format!("segment {k} has non-finite values")));
            }
            if !(seg.ramp >= T::zero() && seg.ramp.is_finite()) {
                return Err(Error::config(format!("segment {k} has negative ramp duration")));
            }
        }
        for (k, pair) in segments.windows(2).enumerate() {
            if pair[1].start <= pair[0].start {
                return Err(Error::config(format!(
                    "segment {} starts at {} which is not after segment {k} at {}",
                    k + 1,
                    pair[1].start,
                    pair[0].start
                )));
            }
            if k > 0 && pair[0].start + pair[0].ramp > pair[1].start {
                return Err(Error::RampOverlap {
                    ramp: pair[0].ramp.as_f64(),
                    plateau: (pair[1].start - pair[0].start).as_f64(),
                });
            }
        }
        Ok(Self { segments, shape })
    }

    pub fn constant(phase: T) -> Self {
        Self {
            segments: vec![PhaseSegment::new(T::zero(), phase, T::zero())],
            shape: RampShape::default(),
        }
    }

    pub fn segments(&self) -> &[PhaseSegment<T>] {
        &self.segments
    }

    pub fn shape(&self) -> RampShape {
        self.shape
    }

    /// Time at which the last transition completes.
    pub fn settled_at(&self) -> T {
        let last = self.segments.last().expect("non-empty");
        if self.segments.len() == 1 {
            last.start
        } else {
            last.start + last.ramp
        }
    }

    pub fn is_constant(&self) -> bool {
        self.segments.windows(2).all(|w| w[0].phase == w[1].phase)
    }

    pub fn phase_at(&self, t: T) -> T {
        let k = self.segments.partition_point(|s| s.start <= t);
        if k == 0 {
            return self.segments[0].phase;
        }
        let seg = &self.segments[k - 1];
        if k == 1 || seg.ramp.is_zero() || t >= seg.start + seg.ramp {
            return seg.phase;
        }
        let prev = self.segments[k - 2].phase;
        let w = self.shape.weight((t - seg.start) / seg.ramp);
        prev + (seg.phase - prev) * w
    }
}

/// Per-site loss rates plus the port coupling at `j = 0`.
///
/// The intrinsic part is `A*delta(j,0) + B*exp(-|j|/xi) + C`, optionally replaced
/// site by site through `overrides`. The total rate adds the port rate at `j = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LossModel<T> {
    pub port_rate: T,
    pub site0_extra: T,
    pub decay_amplitude: T,
    pub decay_length: T,
    pub uniform: T,
    pub overrides: BTreeMap<i64, T>,
}

impl<T: Real> LossModel<T> {
    pub fn new(port_rate: T, site0_extra: T, decay_amplitude: T, decay_length: T, uniform: T) -> Result<Self> {
        let m = Self {
            port_rate,
            site0_extra,
            decay_amplitude,
            decay_length,
            uniform,
            overrides: BTreeMap::new(),
        };
        m.validate()?;
        Ok(m)
    }

    /// Lossless lattice apart from the port coupling.
    pub fn port_only(port_rate: T) -> Self {
        Self {
            port_rate,
            site0_extra: T::zero(),
            decay_amplitude: T::zero(),
            decay_length: T::one(),
            uniform: T::zero(),
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_override(mut self, j: i64, intrinsic: T) -> Result<Self> {
        self.overrides.insert(j, intrinsic);
        self.validate()?;
        Ok(self)
    }

    pub fn with_port_rate(mut self, port_rate: T) -> Self {
        self.port_rate = port_rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("port_rate", self.port_rate),
            ("site0_extra", self.site0_extra),
            ("decay_amplitude", self.decay_amplitude),
            ("uniform", self.uniform),
        ];
        for (name, v) in named {
            if !(v >= T::zero() && v.is_finite()) {
                return Err(Error::config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.decay_length > T::zero() && self.decay_length.is_finite()) {
            return Err(Error::config("decay_length must be positive"));
        }
        for (j, v) in &self.overrides {
            if !(*v >= T::zero() && v.is_finite()) {
                return Err(Error::config(format!("override for site {j} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Loss rate not associated with the port coupling.
    pub fn intrinsic_rate(&self, j: i64) -> T {
        if let Some(v) = self.overrides.get(&j) {
            return *v;
        }
        let mut g = self.uniform;
        if self.decay_amplitude > T::zero() {
            let dist = T::from_i64(j.abs()).unwrap_or_else(T::infinity);
            g += self.decay_amplitude * (-dist / self.decay_length).exp();
        }
        if j == 0 {
            g += self.site0_extra;
        }
        g
    }

    /// Total loss rate `gamma_j`, including the port rate at `j = 0`.
    pub fn total_rate(&self, j: i64) -> T {
        let port = if j == 0 { self.port_rate } else { T::zero() };
        port + self.intrinsic_rate(j)
    }

    /// Range-checked total loss rate of site `j` on `lattice`.
    pub fn loss_rate(&self, lattice: &LatticeConfig<T>, j: i64) -> Result<T> {
        if lattice.index_of(j).is_none() {
            return Err(Error::SiteOutOfRange {
                site: j,
                min: lattice.j_min,
                max: lattice.j_max,
            });
        }
        Ok(self.total_rate(j))
    }

    pub fn total_rates(&self, lattice: &LatticeConfig<T>) -> Vec<T> {
        lattice.sites().map(|j| self.total_rate(j)).collect()
    }

    pub fn intrinsic_rates(&self, lattice: &LatticeConfig<T>) -> Vec<T> {
        lattice.sites().map(|j| self.intrinsic_rate(j)).collect()
    }

    pub fn has_intrinsic_loss(&self, lattice: &LatticeConfig<T>) -> bool {
        lattice.sites().any(|j| self.intrinsic_rate(j) > T::zero())
    }

    /// Same model with `extra` added to the uniform term.
    pub fn with_extra_uniform(&self, extra: T) -> Self {
        Self {
            uniform: self.uniform + extra,
            ..self.clone()
        }
    }
}

/// Time envelope of the driving field.
#[derive(Clone, Debug, PartialEq)]
pub enum Envelope<T> {
    /// `exp(-(t - center)^2 / (2 width^2))`.
    Gaussian { width: T },
    /// Linearly interpolated samples starting at `start` with spacing `step`;
    /// zero outside the sampled range.
    Sampled {
        start: T,
        step: T,
        values: Vec<Complex<T>>,
    },
    /// Continuous wave switched on by a smootherstep of duration `rise`
    /// beginning at `center`.
    Continuous { rise: T },
}

/// Coherent input field `scale * envelope(t) * exp(-i omega_c t)` at the port.
#[derive(Clone, Debug, PartialEq)]
pub struct InputPulse<T> {
    pub envelope: Envelope<T>,
    pub scale: T,
    pub carrier: T,
    pub center: T,
}

impl<T: Real> InputPulse<T> {
    pub fn gaussian(scale: T, width: T, carrier: T, center: T) -> Result<Self> {
        if !(width > T::zero() && width.is_finite()) {
            return Err(Error::config("Gaussian width must be positive"));
        }
        Ok(Self {
            envelope: Envelope::Gaussian { width },
            scale,
            carrier,
            center,
        })
    }

    pub fn sampled(start: T, step: T, values: Vec<Complex<T>>, carrier: T) -> Result<Self> {
        if !(step > T::zero()) || values.is_empty() {
            return Err(Error::config("sampled envelope needs a positive step and samples"));
        }
        Ok(Self {
            envelope: Envelope::Sampled { start, step, values },
            scale: T::one(),
            carrier,
            center: start,
        })
    }

    pub fn continuous(scale: T, carrier: T, switch_on: T, rise: T) -> Result<Self> {
        if !(rise > T::zero()) {
            return Err(Error::config("rise time must be positive"));
        }
        Ok(Self {
            envelope: Envelope::Continuous { rise },
            scale,
            carrier,
            center: switch_on,
        })
    }

    pub fn none() -> Self {
        Self {
            envelope: Envelope::Gaussian { width: T::one() },
            scale: T::zero(),
            carrier: T::zero(),
            center: T::zero(),
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            scale: self.scale * factor,
            ..self.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.scale.is_zero()
    }

    /// Envelope value without the carrier.
    pub fn envelope_at(&self, t: T) -> Complex<T> {
        let v = match &self.envelope {
            Envelope::Gaussian { width } => {
                let x = (t - self.center) / *width;
                Complex::new((-(x * x) * T::lit(0.5)).exp(), T::zero())
            }
            Envelope::Sampled { start, step, values } => {
                let pos = (t - *start) / *step;
                if pos < T::zero() {
                    return Complex::new(T::zero(), T::zero());
                }
                let i = pos.floor().to_usize().unwrap_or(usize::MAX);
                if i + 1 >= values.len() {
                    if i + 1 == values.len() && pos == T::from_usize(i).unwrap() {
                        values[i]
                    } else {
                        Complex::new(T::zero(), T::zero())
                    }
                } else {
                    let frac = pos - T::from_usize(i).unwrap();
                    values[i] * (T::one() - frac) + values[i + 1] * frac
                }
            }
            Envelope::Continuous { rise } => {
                let w = RampShape::Smootherstep.weight((t - self.center) / *rise);
                Complex::new(w, T::zero())
            }
        };
        v * self.scale
    }

    /// Field at time `t` in a frame rotating at `frame` (use zero for the lab frame).
    pub fn field_at(&self, t: T, frame: T) -> Complex<T> {
        if self.scale.is_zero() {
            return Complex::new(T::zero(), T::zero());
        }
        self.envelope_at(t) * Complex::from_polar(T::one(), -(self.carrier - frame) * t)
    }

    /// Interval outside which the envelope is negligible (or exactly zero).
    pub fn support(&self) -> (T, T) {
        match &self.envelope {
            Envelope::Gaussian { width } => {
                let w = T::lit(8.0) * *width;
                (self.center - w, self.center + w)
            }
            Envelope::Sampled { start, step, values } => {
                (*start, *start + *step * T::from_usize(values.len() - 1).unwrap())
            }
            Envelope::Continuous { .. } => (self.center, T::infinity()),
        }
    }

    /// Energy `integral |E|^2 dt` over `[a, b]`.
    pub fn energy_between(&self, a: T, b: T) -> T {
        let (lo, hi) = self.support();
        let a = a.max(lo);
        let b = b.min(hi);
        if !(b > a) || !b.is_finite() {
            return if b.is_finite() { T::zero() } else { T::infinity() };
        }
        let n = 8000usize;
        let h = (b - a) / T::from_usize(n).unwrap();
        let ys: Vec<T> = (0..=n)
            .map(|i| self.envelope_at(a + h * T::from_usize(i).unwrap()).norm_sqr())
            .collect();
        crate::linalg::simpson(&ys, h)
    }

    /// Total energy `integral |E|^2 dt`.
    pub fn energy(&self) -> T {
        match &self.envelope {
            Envelope::Gaussian { width } => self.scale * self.scale * *width * T::PI().sqrt(),
            _ => {
                let (lo, hi) = self.support();
                self.energy_between(lo, hi)
            }
        }
    }
}

/// Tridiagonal coupling matrix at phase `phi`.
///
/// Off-diagonals follow the lattice Hamiltonian `kappa * sum(e^{-i phi} a_j^+ a_{j+1} + h.c.)`
/// (or `kappa cos(phi)` for two opposed auxiliary cavities); the diagonal is
/// `omega0 - i gamma_j / 2` when `losses` is given and `omega0` otherwise.
pub fn coupling_matrix<T: Real>(
    config: &LatticeConfig<T>,
    phi: T,
    losses: Option<&LossModel<T>>,
) -> Tridiagonal<Complex<T>> {
    let n = config.num_sites();
    let hop = config.hopping(phi);
    let half = T::lit(0.5);
    let diag = config
        .sites()
        .map(|j| {
            let g = losses.map_or(T::zero(), |m| m.total_rate(j));
            Complex::new(config.omega0, -g * half)
        })
        .collect();
    Tridiagonal {
        lower: vec![hop.conj(); n - 1],
        diag,
        upper: vec![hop; n - 1],
    }
}

/// Free-function form of [`LossModel::loss_rate`].
pub fn loss_rate<T: Real>(model: &LossModel<T>, lattice: &LatticeConfig<T>, j: i64) -> Result<T> {
    model.loss_rate(lattice, j)
}

/// Free-function form of [`PhaseSchedule::phase_at`].
pub fn phase_at<T: Real>(schedule: &PhaseSchedule<T>, t: T) -> T {
    schedule.phase_at(t)
}
