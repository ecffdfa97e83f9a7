//! Numerical core for photonic devices built on synthetic orbital-angular-momentum
//! lattices in a degenerate cavity.
//!
//! The crate covers four layers:
//!
//! * [`lattice`]: lattice geometry, phase schedules, loss models, input pulses and
//!   the tridiagonal coupling matrix,
//! * [`dynamics`]: fixed-step fourth-order integration of the driven coupled-mode
//!   equations with an energy-flux ledger,
//! * [`spectrum`]: Bloch dispersion, group velocity and the Green's-function
//!   reflection response of the port,
//! * [`memory`], [`filter`] and [`params`]: the quantum-memory protocols, stopband
//!   filter design, and the mapping from laboratory parameters to model rates.
//!
//! All numerics are generic over the scalar type through [`Real`]; `f64` aliases are
//! re-exported at the crate root for the common case.

pub mod dynamics;
pub mod error;
pub mod filter;
pub mod lattice;
pub mod linalg;
pub mod memory;
pub mod params;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex<T> = num_complex::Complex<T>;
pub type C64 = num_complex::Complex<f64>;

pub type LatticeConfig64 = lattice::LatticeConfig<f64>;
pub type PhaseSchedule64 = lattice::PhaseSchedule<f64>;
pub type LossModel64 = lattice::LossModel<f64>;
pub type InputPulse64 = lattice::InputPulse<f64>;
pub type Scenario64 = dynamics::Scenario<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type ResponseCurve64 = spectrum::ResponseCurve<f64>;
pub type MemoryPlan64 = memory::MemoryPlan<f64>;
pub type MemoryReport64 = memory::MemoryReport<f64>;
pub type FilterStage64 = filter::FilterStage<f64>;
pub type FilterMetrics64 = filter::FilterMetrics<f64>;
pub type CavitySpec64 = params::CavitySpec<f64>;

pub type LatticeConfig32 = lattice::LatticeConfig<f32>;
pub type Scenario32 = dynamics::Scenario<f32>;
