//! Dense complex linear algebra sized for truncated operator matrices:
//! a cyclic Jacobi eigensolver for Hermitian matrices, spectral norms, and an
//! LU solver for the small weighted least-squares systems of the local fits.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::math;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: alloc::vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// `self += other`, entrywise.
    pub fn add_assign(&mut self, other: &CMat) {
        debug_assert!(self.rows == other.rows && self.cols == other.cols);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert!(self.rows == other.rows && self.cols == other.cols);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= *b;
        }
        out
    }

    /// Leading principal `m x m` submatrix (degree guard for truncation-exact
    /// identities).
    pub fn principal_block(&self, m: usize) -> CMat {
        assert!(m <= self.rows && m <= self.cols);
        CMat::from_fn(m, m, |i, j| self[(i, j)])
    }

    /// Hermitian symmetrization `(A + A^H)/2`.
    pub fn hermitize(&self) -> CMat {
        assert_eq!(self.rows, self.cols);
        CMat::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)].conj())
        })
    }

    pub fn max_abs_entry(&self) -> f64 {
        let mut m = 0.0;
        for v in &self.data {
            let a = v.norm();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Max deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut m = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > m {
                    m = d;
                }
            }
        }
        m
    }
}

impl core::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi with complex
/// rotations. Input is symmetrized first; quadratic convergence makes ~10
/// sweeps plenty at these sizes.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.hermitize();
    let fro: f64 = m.data.iter().map(|v| v.norm_sqr()).sum();
    let tol = 1e-28 * fro.max(1e-300);
    for _sweep in 0..40 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if 2.0 * off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let apq_abs = apq.norm();
                if apq_abs < 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = apq / apq_abs;
                // Real 2x2 rotation angle after factoring out the phase:
                // with s = conj(phase) sigma the elimination condition is
                // (c^2 - sigma^2)|apq| + c sigma (aqq - app) = 0.
                let tau = (app - aqq) / (2.0 * apq_abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + math::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + math::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = phase.conj() * (t * c);
                // A <- J^H A J with J[[c, -conj(s)],[s, c]] in the (p,q) plane.
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * c + akq * s;
                    m[(k, q)] = -akp * s.conj() + akq * c;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = apk * c + aqk * s.conj();
                    m[(q, k)] = -apk * s + aqk * c;
                }
                // Scrub roundoff drift off the eliminated pair.
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    eig
}

/// Largest eigenvalue of a Hermitian matrix, negatives clipped to zero.
pub fn lambda_max_clipped(a: &CMat) -> f64 {
    let eig = hermitian_eigenvalues(a);
    eig.last().copied().unwrap_or(0.0).max(0.0)
}

/// Spectral norm of a general complex matrix via `A^H A`.
pub fn spectral_norm(a: &CMat) -> f64 {
    let gram = a.adjoint().matmul(a);
    math::sqrt(lambda_max_clipped(&gram))
}

/// Solve `A x = b` by LU with partial pivoting. `A` small and square.
pub fn lu_solve(a: &CMat, b: &[Complex64]) -> Result<Vec<Complex64>> {
    assert_eq!(a.rows, a.cols);
    assert_eq!(a.rows, b.len());
    let n = a.rows;
    let mut m = a.clone();
    let mut x: Vec<Complex64> = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[(col, col)].norm();
        for r in (col + 1)..n {
            let v = m[(r, col)].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-300 {
            return Err(invalid("singular system in lu_solve"));
        }
        if piv != col {
            for j in 0..n {
                let t = m[(col, j)];
                m[(col, j)] = m[(piv, j)];
                m[(piv, j)] = t;
            }
            x.swap(col, piv);
        }
        let d = m[(col, col)];
        for r in (col + 1)..n {
            let f = m[(r, col)] / d;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            m[(r, col)] = Complex64::new(0.0, 0.0);
            for j in (col + 1)..n {
                let v = m[(col, j)] * f;
                m[(r, j)] -= v;
            }
            let t = x[col] * f;
            x[r] -= t;
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for j in (col + 1)..n {
            acc -= m[(col, j)] * x[j];
        }
        x[col] = acc / m[(col, col)];
    }
    Ok(x)
}
