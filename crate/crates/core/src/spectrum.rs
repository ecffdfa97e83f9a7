//! Band structure and the frequency-domain reflection response of the port.

use std::io::{self, Write};

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{coupling_matrix, AuxCavities, LatticeConfig, LossModel};
use crate::linalg::{CMatrix, Tridiagonal};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandPoint<T> {
    /// Bloch wave number in `(-pi, pi]`.
    pub k: T,
    pub omega: T,
    /// `d omega / d K`, in sites per unit time.
    pub group_velocity: T,
}

/// Hopping strength that sets the band width: `kappa` for one auxiliary cavity,
/// `kappa cos(phi)` for two opposed ones.
pub fn effective_hopping<T: Real>(kappa: T, phi: T, aux: AuxCavities) -> T {
    match aux {
        AuxCavities::Single => kappa,
        AuxCavities::Opposed => kappa * phi.cos(),
    }
}

/// Eigenfrequency at Bloch wave number `k`:
/// `omega0 - 2 kappa cos(k - phi)` (one auxiliary cavity) or
/// `omega0 - 2 kappa cos(phi) cos(k)` (two opposed ones).
pub fn dispersion<T: Real>(k: T, phi: T, kappa: T, omega0: T, aux: AuxCavities) -> T {
    let two = T::lit(2.0);
    match aux {
        AuxCavities::Single => omega0 - two * kappa * (k - phi).cos(),
        AuxCavities::Opposed => omega0 - two * kappa * phi.cos() * k.cos(),
    }
}

pub fn group_velocity<T: Real>(k: T, phi: T, kappa: T, aux: AuxCavities) -> T {
    let two = T::lit(2.0);
    match aux {
        AuxCavities::Single => two * kappa * (k - phi).sin(),
        AuxCavities::Opposed => two * kappa * phi.cos() * k.sin(),
    }
}

pub fn band_point<T: Real>(k: T, phi: T, kappa: T, omega0: T, aux: AuxCavities) -> BandPoint<T> {
    BandPoint {
        k,
        omega: dispersion(k, phi, kappa, omega0, aux),
        group_velocity: group_velocity(k, phi, kappa, aux),
    }
}

/// Samples the band at `points` wave numbers `-pi + 2 pi (n + 1) / points`, covering `(-pi, pi]`.
pub fn band_structure<T: Real>(lattice: &LatticeConfig<T>, phi: T, points: usize) -> Vec<BandPoint<T>> {
    let two_pi = T::lit(2.0) * T::PI();
    let count = T::from_usize(points.max(1)).unwrap();
    (0..points)
        .map(|n| {
            let k = -T::PI() + two_pi * T::from_usize(n + 1).unwrap() / count;
            band_point(k, phi, lattice.kappa, lattice.omega0, lattice.aux)
        })
        .collect()
}

/// Magnitude of the group velocity of the band mode at frequency `omega`:
/// `sqrt((2 kappa_eff)^2 - (omega - omega0)^2)`.
pub fn group_velocity_at_frequency<T: Real>(
    omega: T,
    kappa: T,
    omega0: T,
    aux: AuxCavities,
    phi: T,
) -> Result<T> {
    let half_width = T::lit(2.0) * effective_hopping(kappa, phi, aux).abs();
    let offset = omega - omega0;
    let slack = T::epsilon() * T::lit(16.0) * half_width.max(T::one());
    if offset.abs() > half_width + slack {
        return Err(Error::OutOfBand {
            offset: offset.as_f64(),
            half_width: half_width.as_f64(),
        });
    }
    Ok((half_width * half_width - offset * offset).max(T::zero()).sqrt())
}

/// Lossless `n`-site ring with the same hopping convention as the open lattice.
/// `n` must be even so that the staggered gauge relating both sign conventions of
/// the hopping term is single valued around the ring.
pub fn ring_matrix<T: Real>(n: usize, kappa: T, omega0: T, phi: T, aux: AuxCavities) -> Result<CMatrix<T>> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::config(format!("ring size must be even and at least 2, got {n}")));
    }
    let cfg = LatticeConfig::new(0, n as i64 - 1, kappa, omega0, aux)?;
    let hop = cfg.hopping(phi);
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        m[(i, i)] = Complex::new(omega0, T::zero());
        let j = (i + 1) % n;
        m[(i, j)] += hop;
        m[(j, i)] += hop.conj();
    }
    Ok(m)
}

/// Eigenvalues of [`ring_matrix`] by direct diagonalization, ascending.
pub fn ring_eigenvalues<T: Real>(n: usize, kappa: T, omega0: T, phi: T, aux: AuxCavities) -> Result<Vec<T>> {
    Ok(ring_matrix(n, kappa, omega0, phi, aux)?.hermitian_eigenvalues())
}

/// Band frequencies at the ring's allowed wave numbers `2 pi n / N`, ascending.
pub fn ring_dispersion<T: Real>(n: usize, kappa: T, omega0: T, phi: T, aux: AuxCavities) -> Vec<T> {
    let two_pi = T::lit(2.0) * T::PI();
    let size = T::from_usize(n).unwrap();
    let mut out: Vec<T> = (0..n)
        .map(|m| dispersion(two_pi * T::from_usize(m).unwrap() / size, phi, kappa, omega0, aux))
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Uniform frequency grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid<T> {
    pub min: T,
    pub max: T,
    pub points: usize,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(min: T, max: T, points: usize) -> Result<Self> {
        if !(max > min) || points < 2 {
            return Err(Error::config("frequency grid needs max > min and at least two points"));
        }
        Ok(Self { min, max, points })
    }

    /// 2001 points over `omega0 +/- 3 kappa`.
    pub fn around(omega0: T, kappa: T) -> Self {
        let span = T::lit(3.0) * kappa;
        Self {
            min: omega0 - span,
            max: omega0 + span,
            points: 2001,
        }
    }

    pub fn step(&self) -> T {
        (self.max - self.min) / T::from_usize(self.points - 1).unwrap()
    }

    pub fn values(&self) -> Vec<T> {
        let h = self.step();
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.max
                } else {
                    self.min + h * T::from_usize(i).unwrap()
                }
            })
            .collect()
    }
}

/// Treatment of the lattice ends in the frequency domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Termination {
    /// Hard walls at `j_min` and `j_max`.
    #[default]
    Open,
    /// Ends dressed with the retarded self-energy of a semi-infinite uniform lead,
    /// which represents an unbounded lattice exactly when losses are uniform
    /// beyond the truncation.
    Matched,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResponseMeta {
    pub sites: usize,
    /// Sup-norm change of `f` between the last two lattice sizes.
    pub sup_change: f64,
    pub converged: bool,
    pub termination: Termination,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResponseCurve<T> {
    pub omega: Vec<T>,
    /// Power reflection `|E_out / E_in|^2` of the port.
    pub f: Vec<T>,
    pub meta: ResponseMeta,
}

impl<T: Real> ResponseCurve<T> {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn db(&self) -> Vec<T> {
        self.f.iter().map(|&v| to_db(v)).collect()
    }

    /// Pointwise product with another curve on the same grid.
    pub fn times(&self, other: &Self) -> Self {
        assert_eq!(self.omega, other.omega, "curves must share a grid");
        Self {
            omega: self.omega.clone(),
            f: self.f.iter().zip(&other.f).map(|(a, b)| *a * *b).collect(),
            meta: ResponseMeta {
                sites: self.meta.sites.max(other.meta.sites),
                sup_change: self.meta.sup_change.max(other.meta.sup_change),
                converged: self.meta.converged && other.meta.converged,
                termination: self.meta.termination,
                notes: self.meta.notes.iter().chain(&other.meta.notes).cloned().collect(),
            },
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W, omega0: T, kappa: T) -> io::Result<()> {
        writeln!(w, "omega,offset_kappa,f,db")?;
        for (o, f) in self.omega.iter().zip(&self.f) {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                o,
                (*o - omega0) / kappa,
                f,
                to_db(*f)
            )?;
        }
        Ok(())
    }
}

pub fn to_db<T: Real>(f: T) -> T {
    T::lit(10.0) * f.max(T::min_positive_value()).log10()
}

/// Retarded surface Green's function of a semi-infinite chain with hopping
/// magnitude `hop` at complex energy `z` (measured from the on-site energy).
fn lead_surface_green<T: Real>(z: Complex<T>, hop: T) -> Complex<T> {
    let h2 = hop * hop;
    let disc = (z * z - Complex::new(T::lit(4.0) * h2, T::zero())).sqrt();
    let two_h2 = T::lit(2.0) * h2;
    let g1 = (z - disc) / two_h2;
    let g2 = (z + disc) / two_h2;
    let (n1, n2) = (g1.norm(), g2.norm());
    let tie = (n1 - n2).abs() <= T::lit(1e-12) * (n1 + n2);
    if tie {
        if g1.im <= g2.im {
            g1
        } else {
            g2
        }
    } else if n1 < n2 {
        g1
    } else {
        g2
    }
}

fn resolvent_system<T: Real>(
    lattice: &LatticeConfig<T>,
    losses: &LossModel<T>,
    phase: T,
    omega: T,
    termination: Termination,
    regularization: T,
) -> Tridiagonal<Complex<T>> {
    let h = coupling_matrix(lattice, phase, None);
    let half = T::lit(0.5);
    let mut m = Tridiagonal {
        lower: h.lower.iter().map(|v| -*v).collect(),
        diag: lattice
            .sites()
            .zip(&h.diag)
            .map(|(j, d)| {
                let g = losses.total_rate(j) + regularization;
                Complex::new(omega - d.re, g * half)
            })
            .collect(),
        upper: h.upper.iter().map(|v| -*v).collect(),
    };
    if termination == Termination::Matched {
        let hop = lattice.hopping(phase).norm();
        if hop > T::zero() {
            let z = Complex::new(omega - lattice.omega0, (losses.uniform + regularization) * half);
            let sigma = lead_surface_green(z, hop) * (hop * hop);
            let n = m.diag.len();
            m.diag[0] -= sigma;
            m.diag[n - 1] -= sigma;
        }
    }
    m
}

/// Port matrix element `<0|G|0>` with `G = -i gamma_port (omega - H + i Gamma/2)^{-1}`.
/// Returns `None` when the system is singular.
pub fn port_green<T: Real>(
    lattice: &LatticeConfig<T>,
    losses: &LossModel<T>,
    phase: T,
    omega: T,
    termination: Termination,
) -> Option<Complex<T>> {
    port_green_regularized(lattice, losses, phase, omega, termination, T::zero())
}

fn port_green_regularized<T: Real>(
    lattice: &LatticeConfig<T>,
    losses: &LossModel<T>,
    phase: T,
    omega: T,
    termination: Termination,
    regularization: T,
) -> Option<Complex<T>> {
    let m = resolvent_system(lattice, losses, phase, omega, termination, regularization);
    let n = m.dim();
    let port = lattice.port_index();
    let mut rhs = vec![Complex::new(T::zero(), T::zero()); n];
    rhs[port] = Complex::new(T::one(), T::zero());
    let x = m.solve(&rhs)?;
    Some(x[port] * Complex::new(T::zero(), -losses.port_rate))
}

/// Power reflection `|1 + <0|G|0>|^2` at a single frequency.
pub fn reflection<T: Real>(
    lattice: &LatticeConfig<T>,
    losses: &LossModel<T>,
    phase: T,
    omega: T,
    termination: Termination,
) -> Option<T> {
    port_green(lattice, losses, phase, omega, termination).map(|g| (g + T::one()).norm_sqr())
}

/// Evaluates the response on a fixed lattice without any convergence check.
pub fn filter_response_on<T: Real>(
    lattice: &LatticeConfig<T>,
    losses: &LossModel<T>,
    grid: &FrequencyGrid<T>,
    phase: T,
    termination: Termination,
) -> Result<ResponseCurve<T>> {
    lattice.validate()?;
    losses.validate()?;
    let omega = grid.values();
    let regularization = T::epsilon().sqrt() * lattice.kappa;
    let solved: Vec<(T, bool)> = omega
        .par_iter()
        .map(|&w| match port_green(lattice, losses, phase, w, termination) {
            Some(g) => ((g + T::one()).norm_sqr(), false),
            None => {
                let g = port_green_regularized(lattice, losses, phase, w, termination, regularization)
                    .unwrap_or_else(|| Complex::new(T::zero(), T::zero()));
                ((g + T::one()).norm_sqr(), true)
            }
        })
        .collect();
    let mut notes = Vec::new();
    let regularized = solved.iter().filter(|(_, r)| *r).count();
    if regularized > 0 {
        notes.push(format!(
            "{regularized} singular frequencies regularized with uniform loss {:.3e}",
            regularization.as_f64()
        ));
    }
    Ok(ResponseCurve {
        omega,
        f: solved.into_iter().map(|(f, _)| f).collect(),
        meta: ResponseMeta {
            sites: lattice.num_sites(),
            sup_change: f64::NAN,
            converged: false,
            termination,
            notes,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResponseOptions<T> {
    pub phase: T,
    /// Sup-norm change of `f` under lattice doubling accepted as converged.
    pub tolerance: T,
    pub max_sites: usize,
}

impl<T: Real> Default for ResponseOptions<T> {
    fn default() -> Self {
        Self {
            phase: T::zero(),
            tolerance: T::lit(1e-6),
            max_sites: 1 << 15,
        }
    }
}

/// Reflection response of the port, doubling the lattice until the curve changes
/// by less than `opts.tolerance` in sup norm.
///
/// A lattice without intrinsic loss has no length scale over which reflections
/// from the truncation die out; in that case the ends are dressed with the
/// retarded lead self-energy and the note is recorded in the metadata.
pub fn filter_response<T: Real>(
    lattice: &LatticeConfig<T>,
    losses: &LossModel<T>,
    grid: &FrequencyGrid<T>,
    opts: ResponseOptions<T>,
) -> Result<ResponseCurve<T>> {
    let termination = if losses.has_intrinsic_loss(lattice) {
        Termination::Open
    } else {
        Termination::Matched
    };
    let mut current = lattice.clone();
    let mut curve = filter_response_on(&current, losses, grid, opts.phase, termination)?;
    loop {
        let next = current.doubled();
        if next.num_sites() > opts.max_sites {
            return Err(Error::NotConverged {
                change: curve.meta.sup_change,
                sites: current.num_sites(),
                recommended: next.num_sites(),
            });
        }
        let mut refined = filter_response_on(&next, losses, grid, opts.phase, termination)?;
        let change = curve
            .f
            .iter()
            .zip(&refined.f)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        refined.meta.sup_change = change.as_f64();
        if change < opts.tolerance {
            refined.meta.converged = true;
            if termination == Termination::Matched {
                refined
                    .meta
                    .notes
                    .push("no intrinsic loss: lattice ends matched to a semi-infinite lead".into());
            }
            return Ok(refined);
        }
        current = next;
        curve = refined;
    }
}
