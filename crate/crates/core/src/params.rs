//! Mapping from cavity hardware to model rates.
//!
//! All frequencies are angular (rad/s).

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Main cavity round-trip length and beam-splitter reflectivity of the coupling element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavitySpec<T> {
    /// Round-trip length `L` in metres.
    pub length: T,
    /// Power reflectivity `|r_B|^2`; the transmissivity is `1 - |r_B|^2`.
    pub reflectivity: T,
}

impl<T: Real> CavitySpec<T> {
    pub fn new(length: T, reflectivity: T) -> Result<Self> {
        let s = Self { length, reflectivity };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > T::zero() && self.length.is_finite()) {
            return Err(Error::config("cavity length must be positive"));
        }
        if !(self.reflectivity >= T::zero() && self.reflectivity < T::one()) {
            return Err(Error::config("reflectivity must lie in [0, 1)"));
        }
        Ok(())
    }

    pub fn free_spectral_range(&self) -> T {
        free_spectral_range(self.length)
    }

    pub fn alpha(&self) -> T {
        alpha(self.reflectivity)
    }

    pub fn kappa(&self) -> T {
        tunneling_rate(self.reflectivity, self.free_spectral_range())
    }

    /// Full band width `4 kappa`.
    pub fn bandwidth(&self) -> T {
        T::lit(4.0) * self.kappa()
    }

    pub fn derived(&self) -> Derived<T> {
        let kappa = self.kappa();
        Derived {
            fsr: self.free_spectral_range(),
            alpha: self.alpha(),
            kappa,
            bandwidth: T::lit(4.0) * kappa,
            pulse_duration: pulse_duration(kappa),
            write_time: write_time(kappa),
        }
    }
}

/// Quantities derived from a [`CavitySpec`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derived<T> {
    pub fsr: T,
    pub alpha: T,
    pub kappa: T,
    pub bandwidth: T,
    pub pulse_duration: T,
    pub write_time: T,
}

impl<T: Real> fmt::Display for Derived<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "fsr = {} ({:.6e} rad/s)", two_pi_mhz(self.fsr), self.fsr)?;
        writeln!(f, "alpha = {:.6}", self.alpha)?;
        writeln!(f, "kappa = {} ({:.6e} rad/s)", two_pi_mhz(self.kappa), self.kappa)?;
        writeln!(f, "bandwidth_4kappa = {} ({:.6e} rad/s)", two_pi_mhz(self.bandwidth), self.bandwidth)?;
        writeln!(f, "pulse_duration = {:.3} ns", self.pulse_duration.as_f64() * 1e9)?;
        write!(f, "write_time = {:.3} ns", self.write_time.as_f64() * 1e9)
    }
}

/// `Omega0 = 2 pi c / L`.
pub fn free_spectral_range<T: Real>(length: T) -> T {
    T::lit(2.0) * T::PI() * T::lit(SPEED_OF_LIGHT) / length
}

/// `alpha = r^2 / (1 + t^2)` with `t^2 = 1 - r^2`.
pub fn alpha<T: Real>(reflectivity: T) -> T {
    reflectivity / (T::one() + (T::one() - reflectivity))
}

/// `kappa = Omega0 alpha (1 + alpha) / (2 pi)`.
pub fn tunneling_rate<T: Real>(reflectivity: T, fsr: T) -> T {
    let a = alpha(reflectivity);
    fsr * a * (T::one() + a) / (T::lit(2.0) * T::PI())
}

/// Shortest Gaussian width the band supports, `2.5 / kappa`.
pub fn pulse_duration<T: Real>(kappa: T) -> T {
    T::lit(2.5) / kappa
}

/// Write-in time meeting the bandwidth condition `2 kappa t_io = 12 pi`.
pub fn write_time<T: Real>(kappa: T) -> T {
    T::lit(12.0) * T::PI() / (T::lit(2.0) * kappa)
}

/// Formats an angular frequency as `2pi x <value> MHz`.
pub fn two_pi_mhz<T: Real>(omega: T) -> String {
    format!("2pi x {:.3} MHz", omega.as_f64() / (2.0 * std::f64::consts::PI) / 1e6)
}
