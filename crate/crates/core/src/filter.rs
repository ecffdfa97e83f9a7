//! Stopband filters built from one or more lattice stages.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{AuxCavities, LatticeConfig, LossModel};
use crate::scalar::Real;
use crate::spectrum::{
    filter_response, group_velocity_at_frequency, reflection, to_db, FrequencyGrid, ResponseCurve, ResponseMeta,
    ResponseOptions, Termination,
};

/// One filter stage: a lattice with a single auxiliary cavity, probed through its port.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterStage<T> {
    pub kappa: T,
    pub omega0: T,
    /// Port rate plus intrinsic losses.
    pub losses: LossModel<T>,
}

impl<T: Real> FilterStage<T> {
    pub fn new(kappa: T, omega0: T, losses: LossModel<T>) -> Result<Self> {
        if !(kappa > T::zero() && kappa.is_finite() && omega0.is_finite()) {
            return Err(Error::config("stage needs positive kappa and finite omega0"));
        }
        losses.validate()?;
        Ok(Self { kappa, omega0, losses })
    }

    /// Stage whose maximum absorption sits at `target`, with intrinsic losses
    /// taken from `intrinsic` (its port rate is replaced).
    pub fn targeting(kappa: T, omega0: T, target: T, intrinsic: &LossModel<T>) -> Result<Self> {
        let port = gamma_for_target(target, kappa, omega0)?;
        Self::new(kappa, omega0, intrinsic.clone().with_port_rate(port))
    }

    pub fn port_rate(&self) -> T {
        self.losses.port_rate
    }

    pub fn lattice(&self, half_width: i64) -> Result<LatticeConfig<T>> {
        LatticeConfig::symmetric(half_width, self.kappa, self.omega0, AuxCavities::Single)
    }

    pub fn response(&self, grid: &FrequencyGrid<T>) -> Result<ResponseCurve<T>> {
        filter_response(&self.lattice(INITIAL_HALF_WIDTH)?, &self.losses, grid, ResponseOptions::default())
    }
}

const INITIAL_HALF_WIDTH: i64 = 32;

/// Both frequencies `omega0 -/+ Delta` where `2 |v_g| = gamma_port`, lower first.
pub fn max_absorption_frequency<T: Real>(stage: &FilterStage<T>) -> Result<(T, T)> {
    let g = stage.port_rate();
    let limit = T::lit(4.0) * stage.kappa;
    if !(g > T::zero()) {
        return Err(Error::config("port rate must be positive"));
    }
    if g > limit {
        return Err(Error::NoAbsorptionMaximum {
            port_rate: g.as_f64(),
            limit: limit.as_f64(),
        });
    }
    let half = g * T::lit(0.5);
    let two_k = T::lit(2.0) * stage.kappa;
    let delta = (two_k * two_k - half * half).max(T::zero()).sqrt();
    Ok((stage.omega0 - delta, stage.omega0 + delta))
}

/// Port rate `2 sqrt(4 kappa^2 - (omega_m - omega0)^2)` that puts maximum absorption at `omega_m`.
pub fn gamma_for_target<T: Real>(omega_m: T, kappa: T, omega0: T) -> Result<T> {
    let offset = omega_m - omega0;
    if offset.abs() >= T::lit(2.0) * kappa {
        return Err(Error::OutOfBand {
            offset: offset.as_f64(),
            half_width: (T::lit(2.0) * kappa).as_f64(),
        });
    }
    Ok(T::lit(2.0) * group_velocity_at_frequency(omega_m, kappa, omega0, AuxCavities::Single, T::zero())?)
}

/// Stages in series with power transfer functions multiplied pointwise.
pub fn cascade_response<T: Real>(stages: &[FilterStage<T>], grid: &FrequencyGrid<T>) -> Result<ResponseCurve<T>> {
    if stages.is_empty() {
        return Err(Error::config("cascade needs at least one stage"));
    }
    let curves: Vec<ResponseCurve<T>> = stages
        .par_iter()
        .map(|s| s.response(grid))
        .collect::<Result<_>>()?;
    let mut iter = curves.into_iter();
    let first = iter.next().expect("non-empty");
    Ok(iter.fold(first, |acc, c| acc.times(&c)))
}

/// Cascade response at one frequency, every stage on a lattice of the given half width.
fn cascade_at<T: Real>(stages: &[FilterStage<T>], half_width: i64, omega: T) -> T {
    stages.iter().fold(T::one(), |acc, s| {
        let lat = s.lattice(half_width).expect("validated stage");
        let f = reflection(&lat, &s.losses, T::zero(), omega, termination_for(s, &lat))
            .unwrap_or_else(T::one);
        acc * f
    })
}

fn termination_for<T: Real>(stage: &FilterStage<T>, lattice: &LatticeConfig<T>) -> Termination {
    if stage.losses.has_intrinsic_loss(lattice) {
        Termination::Open
    } else {
        Termination::Matched
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterMetrics<T> {
    /// Frequencies where the -3 dB threshold is crossed around the deepest minimum.
    pub edges_3db: (T, T),
    /// Same for -25 dB; equal endpoints (zero width) when never reached.
    pub edges_25db: (T, T),
    pub width_3db: T,
    pub width_25db: T,
    /// `width_25db / width_3db`.
    pub shape_factor: T,
    pub min_db: T,
    pub min_at: T,
    /// Highest point strictly between the two deepest local minima, in dB.
    pub hump_db: Option<T>,
    /// Locations of those two minima.
    pub minima: Option<(T, T)>,
}

impl<T: Real> FilterMetrics<T> {
    pub fn to_record(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "width_3db={:.10e}", self.width_3db);
        let _ = writeln!(s, "width_25db={:.10e}", self.width_25db);
        let _ = writeln!(s, "shape_factor={:.10e}", self.shape_factor);
        let _ = writeln!(s, "edge_3db_low={:.10e}", self.edges_3db.0);
        let _ = writeln!(s, "edge_3db_high={:.10e}", self.edges_3db.1);
        let _ = writeln!(s, "edge_25db_low={:.10e}", self.edges_25db.0);
        let _ = writeln!(s, "edge_25db_high={:.10e}", self.edges_25db.1);
        let _ = writeln!(s, "min_db={:.10e}", self.min_db);
        let _ = writeln!(s, "min_at={:.10e}", self.min_at);
        match self.hump_db {
            Some(h) => {
                let _ = writeln!(s, "hump_db={:.10e}", h);
            }
            None => {
                let _ = writeln!(s, "hump_db=none");
            }
        }
        s
    }
}

/// Crossing of `threshold` (dB) between grid points `i` and `i + 1`, linear in dB.
fn crossing<T: Real>(omega: &[T], db: &[T], i: usize, threshold: T) -> T {
    let (d0, d1) = (db[i], db[i + 1]);
    if d1 == d0 {
        return omega[i];
    }
    let s = (threshold - d0) / (d1 - d0);
    omega[i] + (omega[i + 1] - omega[i]) * s
}

/// Walks outward from `center` to the first points at or above `threshold` and
/// returns the lower indices of the two bracketing grid intervals.
fn bracket<T: Real>(db: &[T], center: usize, threshold: T) -> Option<(usize, usize)> {
    let mut lo = center;
    while db[lo] < threshold {
        if lo == 0 {
            return None;
        }
        lo -= 1;
    }
    let mut hi = center;
    while db[hi] < threshold {
        if hi + 1 == db.len() {
            return None;
        }
        hi += 1;
    }
    Some((lo, hi - 1))
}

/// Stopband metrics of a sampled curve.
pub fn filter_metrics<T: Real>(curve: &ResponseCurve<T>) -> Result<FilterMetrics<T>> {
    let n = curve.len();
    if n < 3 {
        return Err(Error::config("curve needs at least three points"));
    }
    let db: Vec<T> = curve.db();
    let (center, min_db) = db
        .iter()
        .copied()
        .enumerate()
        .fold((0, T::infinity()), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });

    let edges = |threshold: f64| -> Option<(T, T)> {
        let t = T::lit(threshold);
        let (lo, hi) = bracket(&db, center, t)?;
        Some((crossing(&curve.omega, &db, lo, t), crossing(&curve.omega, &db, hi, t)))
    };
    let edges_3db = if min_db < T::lit(-3.0) {
        edges(-3.0).ok_or(Error::NoStopband)?
    } else {
        return Err(Error::NoStopband);
    };
    let edges_25db = if min_db < T::lit(-25.0) {
        edges(-25.0).ok_or(Error::NoStopband)?
    } else {
        let w = curve.omega[center];
        (w, w)
    };
    let width_3db = edges_3db.1 - edges_3db.0;
    let width_25db = edges_25db.1 - edges_25db.0;

    let (minima, hump_db) = hump(&curve.omega, &db);
    Ok(FilterMetrics {
        edges_3db,
        edges_25db,
        width_3db,
        width_25db,
        shape_factor: width_25db / width_3db,
        min_db,
        min_at: curve.omega[center],
        hump_db,
        minima,
    })
}

/// Two deepest strict local minima inside the -3 dB stopband and the highest
/// point between them.
fn hump<T: Real>(omega: &[T], db: &[T]) -> (Option<(T, T)>, Option<T>) {
    let stop = T::lit(-3.0);
    let mut mins: Vec<usize> = (1..db.len() - 1)
        .filter(|&i| db[i] < stop && db[i] < db[i - 1] && db[i] < db[i + 1])
        .collect();
    if mins.len() < 2 {
        return (None, None);
    }
    mins.sort_by(|a, b| db[*a].partial_cmp(&db[*b]).unwrap_or(std::cmp::Ordering::Equal));
    let (a, b) = (mins[0].min(mins[1]), mins[0].max(mins[1]));
    let top = db[a + 1..b].iter().copied().fold(T::neg_infinity(), T::max);
    (Some((omega[a], omega[b])), Some(top))
}

/// Moves each threshold crossing onto the true curve `eval` by bisection inside
/// one grid step, until every edge is known to `1e-4` of the -3 dB width; the
/// widths then change by well under 0.1%.
pub fn refine_metrics<T: Real>(metrics: &FilterMetrics<T>, grid_step: T, eval: impl Fn(T) -> T) -> FilterMetrics<T> {
    let db_at = |w: T| to_db(eval(w));
    let tol = T::lit(1e-4) * metrics.width_3db;
    let refine = |edge: T, threshold: T, inside_is_right: bool| -> T {
        let (mut inside, mut outside) = if inside_is_right {
            (edge + grid_step, edge - grid_step)
        } else {
            (edge - grid_step, edge + grid_step)
        };
        if !(db_at(inside) < threshold && db_at(outside) >= threshold) {
            return edge;
        }
        while (outside - inside).abs() > tol {
            let mid = (inside + outside) * T::lit(0.5);
            if db_at(mid) < threshold {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        (inside + outside) * T::lit(0.5)
    };
    let mut m = *metrics;
    let t3 = T::lit(-3.0);
    m.edges_3db = (refine(m.edges_3db.0, t3, true), refine(m.edges_3db.1, t3, false));
    if m.width_25db > T::zero() {
        let t25 = T::lit(-25.0);
        m.edges_25db = (refine(m.edges_25db.0, t25, true), refine(m.edges_25db.1, t25, false));
    }
    m.width_3db = m.edges_3db.1 - m.edges_3db.0;
    m.width_25db = m.edges_25db.1 - m.edges_25db.0;
    m.shape_factor = m.width_25db / m.width_3db;
    m
}

/// Curve and metrics for a cascade, with crossings refined on the lattice size
/// at which the curve converged.
pub fn cascade_metrics<T: Real>(
    stages: &[FilterStage<T>],
    grid: &FrequencyGrid<T>,
) -> Result<(ResponseCurve<T>, FilterMetrics<T>)> {
    let curve = cascade_response(stages, grid)?;
    let coarse = filter_metrics(&curve)?;
    let half = (curve.meta.sites.saturating_sub(1) / 2) as i64;
    let refined = refine_metrics(&coarse, grid.step(), |w| cascade_at(stages, half, w));
    Ok((curve, refined))
}

/// Requirements for a two-stage design.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignTarget<T> {
    pub kappa: T,
    pub omega0: T,
    /// Desired -3 dB stopband width.
    pub width_3db: T,
    /// Required rejection depth in dB (positive number).
    pub rejection_db: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Design<T> {
    pub stages: Vec<FilterStage<T>>,
    /// Offsets of the targeted absorption maxima below `omega0`.
    pub offsets: Vec<T>,
    pub curve: ResponseCurve<T>,
    pub metrics: FilterMetrics<T>,
}

/// Two-stage design by exhaustive search over pairs of absorption targets on a
/// `0.05 kappa` lattice of offsets, using the intrinsic losses of `intrinsic`.
///
/// Among designs that reach the rejection depth, the one whose -3 dB width is
/// closest to the target wins; ties go to the larger shape factor.
pub fn design_two_stage<T: Real>(
    target: &DesignTarget<T>,
    intrinsic: &LossModel<T>,
    grid: &FrequencyGrid<T>,
) -> Result<Design<T>> {
    let DesignTarget {
        kappa,
        omega0,
        width_3db,
        rejection_db,
    } = *target;
    if !(width_3db > T::zero() && rejection_db > T::zero()) {
        return Err(Error::config("design target needs positive width and rejection"));
    }
    let offsets: Vec<T> = (1..40).map(|k| T::lit(0.05 * k as f64) * kappa).collect();
    let curves: Vec<(FilterStage<T>, ResponseCurve<T>)> = offsets
        .par_iter()
        .map(|&d| {
            let stage = FilterStage::targeting(kappa, omega0, omega0 - d, intrinsic)?;
            let curve = stage.response(grid)?;
            Ok((stage, curve))
        })
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..offsets.len())
        .flat_map(|a| (0..=a).map(move |b| (a, b)))
        .collect();
    let scored: Vec<(usize, usize, T, T)> = pairs
        .par_iter()
        .filter_map(|&(a, b)| {
            let curve = if a == b {
                curves[a].1.clone()
            } else {
                curves[a].1.times(&curves[b].1)
            };
            let m = filter_metrics(&curve).ok()?;
            (m.min_db <= -rejection_db).then(|| (a, b, (m.width_3db - width_3db).abs(), m.shape_factor))
        })
        .collect();
    let best = scored
        .into_iter()
        .min_by(|x, y| {
            x.2.partial_cmp(&y.2)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(y.3.partial_cmp(&x.3).unwrap_or(std::cmp::Ordering::Equal))
        })
        .ok_or(Error::NoStopband)?;
    let (a, b) = (best.0, best.1);
    let stages = if a == b {
        vec![curves[a].0.clone()]
    } else {
        vec![curves[a].0.clone(), curves[b].0.clone()]
    };
    let (curve, metrics) = cascade_metrics(&stages, grid)?;
    let offsets = if a == b { vec![offsets[a]] } else { vec![offsets[a], offsets[b]] };
    Ok(Design {
        stages,
        offsets,
        curve,
        metrics,
    })
}

/// Empty metadata for curves assembled by hand.
pub fn synthetic_curve<T: Real>(omega: Vec<T>, f: Vec<T>) -> ResponseCurve<T> {
    ResponseCurve {
        omega,
        f,
        meta: ResponseMeta::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intrinsic() -> LossModel<f64> {
        LossModel::new(0.0, 0.0, 0.1, 1.0, 0.1).unwrap()
    }

    #[test]
    fn absorption_frequency_examples() {
        let s = FilterStage::new(1.0, 0.0, LossModel::port_only(4.0)).unwrap();
        assert_eq!(max_absorption_frequency(&s).unwrap(), (0.0, 0.0));
        let s = FilterStage::<f64>::new(1.0, 0.0, LossModel::port_only(2.0 * 0.872)).unwrap();
        let (lo, hi) = max_absorption_frequency(&s).unwrap();
        assert!((lo + 1.8).abs() < 1e-3 && (hi - 1.8).abs() < 1e-3);
        let s = FilterStage::<f64>::new(1.0, 0.0, LossModel::port_only(2.0 * 1.670)).unwrap();
        assert!((max_absorption_frequency(&s).unwrap().0 + 1.1).abs() < 1e-3);
        let s = FilterStage::new(1.0, 0.0, LossModel::port_only(4.5)).unwrap();
        assert!(matches!(max_absorption_frequency(&s), Err(Error::NoAbsorptionMaximum { .. })));
    }

    #[test]
    fn gamma_for_target_examples() {
        assert_eq!(gamma_for_target(0.0, 1.0, 0.0).unwrap(), 4.0);
        assert!((gamma_for_target(-1.8f64, 1.0, 0.0).unwrap() - 1.744).abs() < 1e-3);
        assert!(gamma_for_target(2.0, 1.0, 0.0).is_err());
        for x in [-1.9, -1.1, -0.3, 0.7] {
            let s = FilterStage::targeting(1.0, 0.5, 0.5 + x, &intrinsic()).unwrap();
            let (lo, hi) = max_absorption_frequency(&s).unwrap();
            let got = if x < 0.0 { lo } else { hi };
            assert!((got - (0.5 + x)).abs() < 1e-12);
        }
    }

    #[test]
    fn rectangular_stopband_has_unit_shape_factor() {
        let omega: Vec<f64> = (0..=200).map(|i| -2.0 + 0.02 * i as f64).collect();
        let rect = |w: f64| if w.abs() < 1.0 { 1e-4 } else { 1.0 };
        let f = omega.iter().map(|w| rect(*w)).collect();
        let m = filter_metrics(&synthetic_curve(omega, f)).unwrap();
        // on the grid each edge is only known to within one step
        assert!((m.shape_factor - 1.0).abs() < 0.02);
        assert!((m.min_db + 40.0).abs() < 1e-12);
        assert!(m.hump_db.is_none());
        let exact = refine_metrics(&m, 0.02, rect);
        assert!((exact.shape_factor - 1.0).abs() < 1e-3);
        assert!((exact.width_3db - 2.0).abs() < 1e-3);
    }

    #[test]
    fn two_notches_report_hump() {
        let omega: Vec<f64> = (0..=400).map(|i| -2.0 + 0.01 * i as f64).collect();
        let f = omega
            .iter()
            .map(|w| {
                let notch = |c: f64| 1.0 - 0.999 * (-(w - c).powi(2) / 0.02).exp();
                notch(-0.5) * notch(0.5)
            })
            .collect();
        let m = filter_metrics(&synthetic_curve(omega, f)).unwrap();
        let (a, b) = m.minima.unwrap();
        assert!((a + 0.5).abs() < 0.02 && (b - 0.5).abs() < 0.02);
        assert!(m.hump_db.unwrap() > -1.0);
        assert!(m.width_25db <= m.width_3db);
    }

    #[test]
    fn all_pass_curve_has_no_stopband() {
        let curve = synthetic_curve(vec![0.0, 1.0, 2.0], vec![1.0, 0.9, 1.0]);
        assert_eq!(filter_metrics(&curve), Err(Error::NoStopband));
    }

    #[test]
    fn single_stage_cascade_is_identity() {
        let grid = FrequencyGrid::new(-3.0, 3.0, 121).unwrap();
        let s = FilterStage::targeting(1.0, 0.0, -1.8, &intrinsic()).unwrap();
        assert_eq!(cascade_response(&[s.clone()], &grid).unwrap(), s.response(&grid).unwrap());
    }

    #[test]
    fn stopband_edges_refine_onto_curve() {
        let grid = FrequencyGrid::new(-3.0, 3.0, 301).unwrap();
        let s = FilterStage::targeting(1.0, 0.0, -1.8, &intrinsic()).unwrap();
        let (curve, m) = cascade_metrics(&[s.clone()], &grid).unwrap();
        let half = ((curve.meta.sites - 1) / 2) as i64;
        let lat = s.lattice(half).unwrap();
        for e in [m.edges_3db.0, m.edges_3db.1] {
            let db = to_db(reflection(&lat, &s.losses, 0.0, e, Termination::Open).unwrap());
            assert!((db + 3.0).abs() < 1e-2, "{db}");
        }
    }
}
