//! Small dense and tridiagonal linear algebra used by the spectral routines.

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Real;

/// Tridiagonal matrix stored by diagonals; `lower[i]` sits at `(i + 1, i)` and
/// `upper[i]` at `(i, i + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> Tridiagonal<Complex<T>> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        let n = self.dim();
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.upper[i];
                m[(i + 1, i)] = self.lower[i];
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.upper[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Solves `self * x = rhs` by Gaussian elimination with partial pivoting.
    /// Returns `None` when a zero pivot is met.
    pub fn solve(&self, rhs: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
        let n = self.dim();
        assert_eq!(rhs.len(), n, "rhs length must match matrix dimension");
        if n == 0 {
            return Some(Vec::new());
        }
        let mut d = self.diag.clone();
        let mut du = self.upper.clone();
        let mut dl = self.lower.clone();
        let mut du2 = vec![Complex::zero(); n.saturating_sub(2)];
        let mut b = rhs.to_vec();

        for k in 0..n - 1 {
            if dl[k].norm_sqr() <= d[k].norm_sqr() {
                if d[k].is_zero() {
                    return None;
                }
                let mult = dl[k] / d[k];
                d[k + 1] = d[k + 1] - mult * du[k];
                b[k + 1] = b[k + 1] - mult * b[k];
            } else {
                // row interchange
                let mult = d[k] / dl[k];
                d[k] = dl[k];
                let tmp = d[k + 1];
                d[k + 1] = du[k] - mult * tmp;
                if k + 2 < n {
                    du2[k] = du[k + 1];
                    du[k + 1] = -mult * du2[k];
                }
                du[k] = tmp;
                let tb = b[k];
                b[k] = b[k + 1];
                b[k + 1] = tb - mult * b[k + 1];
            }
            dl[k] = Complex::zero();
        }
        if d[n - 1].is_zero() {
            return None;
        }

        b[n - 1] = b[n - 1] / d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        }
        for k in (0..n.saturating_sub(2)).rev() {
            b[k] = (b[k] - du[k] * b[k + 1] - du2[k] * b[k + 2]) / d[k];
        }
        if b.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Some(b)
        } else {
            None
        }
    }
}

/// Square complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    /// Conjugates by the diagonal unitary `diag(u)`: returns `U A U^dagger`.
    pub fn conjugate_diagonal(&self, u: &[Complex<T>]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = u[i] * self[(i, j)] * u[j].conj();
            }
        }
        out
    }

    /// Eigenvalues of a Hermitian matrix, ascending. Only the Hermitian part is used.
    pub fn hermitian_eigenvalues(&self) -> Vec<T> {
        // Real embedding [[X, -Y], [Y, X]] of X + iY doubles every eigenvalue.
        let n = self.n;
        let m = 2 * n;
        let mut a = vec![T::zero(); m * m];
        let half = T::lit(0.5);
        for i in 0..n {
            for j in 0..n {
                let h = (self[(i, j)] + self[(j, i)].conj()) * half;
                a[i * m + j] = h.re;
                a[(i + n) * m + (j + n)] = h.re;
                a[i * m + (j + n)] = -h.im;
                a[(i + n) * m + j] = h.im;
            }
        }
        let doubled = symmetric_eigenvalues(a, m);
        doubled.into_iter().step_by(2).collect()
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

/// Cyclic Jacobi eigenvalue iteration for a real symmetric `n x n` matrix in
/// row-major order. Returns eigenvalues in ascending order.
pub fn symmetric_eigenvalues<T: Real>(mut a: Vec<T>, n: usize) -> Vec<T> {
    assert_eq!(a.len(), n * n);
    let eps = T::epsilon();
    let total: T = a.iter().fold(T::zero(), |s, &v| s + v * v);
    for _sweep in 0..64 {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= eps * eps * total || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.is_zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (T::lit(2.0) * apq);
                let t = if theta.abs() > T::lit(1e15) {
                    T::one() / (T::lit(2.0) * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<T> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    eig
}

/// Composite Simpson rule on uniformly spaced samples (trapezoid on a trailing odd interval).
pub fn simpson<T: Real>(samples: &[T], h: T) -> T {
    let n = samples.len();
    if n < 2 {
        return T::zero();
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut acc = T::zero();
    let mut i = 0;
    while i < even {
        acc += samples[i] + T::lit(4.0) * samples[i + 1] + samples[i + 2];
        i += 2;
    }
    let mut total = acc * h / T::lit(3.0);
    if even < intervals {
        total += (samples[n - 2] + samples[n - 1]) * h * T::lit(0.5);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn random_tridiagonal(n: usize, seed: u64) -> Tridiagonal<C> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        Tridiagonal {
            lower: (0..n - 1).map(|_| C::new(next(), next())).collect(),
            diag: (0..n).map(|_| C::new(next(), next())).collect(),
            upper: (0..n - 1).map(|_| C::new(next(), next())).collect(),
        }
    }

    #[test]
    fn tridiagonal_solve_matches_product() {
        for (n, seed) in [(1, 1), (2, 2), (3, 3), (17, 4), (200, 5)] {
            let m = if n == 1 {
                Tridiagonal {
                    lower: vec![],
                    diag: vec![C::new(0.3, -0.2)],
                    upper: vec![],
                }
            } else {
                random_tridiagonal(n, seed)
            };
            let x: Vec<C> = (0..n).map(|i| C::new(i as f64, 1.0 - i as f64 * 0.5)).collect();
            let b = m.mul_vec(&x);
            let got = m.solve(&b).expect("nonsingular");
            let err = got.iter().zip(&x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-8, "n={n} err={err}");
        }
    }

    #[test]
    fn tridiagonal_solve_needs_pivoting() {
        // zero leading diagonal forces a row swap
        let m = Tridiagonal {
            lower: vec![C::new(1.0, 0.0), C::new(2.0, 0.0)],
            diag: vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(3.0, 0.0)],
            upper: vec![C::new(1.0, 0.0), C::new(1.0, 0.0)],
        };
        let x = vec![C::new(1.0, 1.0), C::new(-2.0, 0.0), C::new(0.5, 0.0)];
        let got = m.solve(&m.mul_vec(&x)).unwrap();
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_system_reports_none() {
        let m = Tridiagonal {
            lower: vec![C::new(1.0, 0.0)],
            diag: vec![C::new(1.0, 0.0), C::new(1.0, 0.0)],
            upper: vec![C::new(1.0, 0.0)],
        };
        assert!(m.solve(&[C::new(1.0, 0.0), C::new(0.0, 0.0)]).is_none());
    }

    #[test]
    fn jacobi_on_known_matrix() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let e = symmetric_eigenvalues(vec![2.0f64, 1.0, 1.0, 2.0], 2);
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_pauli_y() {
        let mut m = CMatrix::<f64>::zeros(2);
        m[(0, 1)] = C::new(0.0, -1.0);
        m[(1, 0)] = C::new(0.0, 1.0);
        let e = m.hermitian_eigenvalues();
        assert_eq!(e.len(), 2);
        assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_integrates_cubic_exactly() {
        let h = 0.1;
        let ys: Vec<f64> = (0..=10).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&ys, h) - 0.25).abs() < 1e-14);
    }
}
