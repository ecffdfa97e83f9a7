use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("site {site} outside lattice range [{min}, {max}]")]
    SiteOutOfRange { site: i64, min: i64, max: i64 },

    #[error("frequency offset {offset} lies outside the band of half-width {half_width}")]
    OutOfBand { offset: f64, half_width: f64 },

    #[error("port rate {port_rate} exceeds 4*kappa = {limit}; no in-band maximum-absorption frequency")]
    NoAbsorptionMaximum { port_rate: f64, limit: f64 },

    #[error("time step {dt} is unstable for this scenario; use dt <= {suggested}")]
    UnstableStep { dt: f64, suggested: f64 },

    #[error("phase ramp of {ramp} overlaps a plateau of {plateau}")]
    RampOverlap { ramp: f64, plateau: f64 },

    #[error("only {fraction} of the input pulse energy falls inside the write window (need 0.999)")]
    PulseOutsideWindow { fraction: f64 },

    #[error("response did not converge (sup change {change} with {sites} sites); try at least {recommended} sites")]
    NotConverged {
        change: f64,
        sites: usize,
        recommended: usize,
    },

    #[error("curve has no stopband: no -3 dB crossing found")]
    NoStopband,
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Whether the error stems from bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::SiteOutOfRange { .. }
                | Error::OutOfBand { .. }
                | Error::NoAbsorptionMaximum { .. }
                | Error::RampOverlap { .. }
                | Error::PulseOutsideWindow { .. }
        )
    }
}
