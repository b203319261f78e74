//! Weight exponents with certified convexity bounds.
//!
//! A weight is the exponent `phi` in the measure `e^{-2 phi} dv`. The class we
//! admit has a real Hessian pinched between `m I` and `M I`; the standard
//! quadratic weight and the Fock-Sobolev weight ship with exact bounds, and
//! arbitrary weights can be supplied with user-certified bounds (those enter
//! only through quadrature — closed-form kernel operations reject them).

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::math;

type RealFn = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;
type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum WeightKind {
    /// `phi(z) = (alpha/2)|z|^2`.
    Standard { alpha: f64 },
    /// `phi(z) = |z|^2 - (1/2) log(1+|z|^2)`.
    FockSobolev,
    /// Quadrature-only weight with caller-certified Hessian bounds.
    Custom,
}

/// Weight exponent `phi` with its Wirtinger gradient and Hessian bounds.
#[derive(Clone)]
pub struct Weight {
    kind: WeightKind,
    eval: RealFn,
    grad: ComplexFn,
    /// Lower Hessian eigenvalue bound, `> 0`.
    pub m: f64,
    /// Upper Hessian eigenvalue bound, `>= m`.
    pub m_upper: f64,
}

impl Weight {
    pub fn standard(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(invalid("weight alpha must be > 0"));
        }
        Ok(Weight {
            kind: WeightKind::Standard { alpha },
            eval: Arc::new(move |z: Complex64| 0.5 * alpha * z.norm_sqr()),
            grad: Arc::new(move |z: Complex64| 0.5 * alpha * z.conj()),
            m: alpha,
            m_upper: alpha,
        })
    }

    /// The Fock-Sobolev exponent; eigenvalues of the real Hessian lie in
    /// [1, 17/8] (the radial branch peaks at |z|^2 = 3).
    pub fn fock_sobolev() -> Self {
        Weight {
            kind: WeightKind::FockSobolev,
            eval: Arc::new(|z: Complex64| {
                let u = z.norm_sqr();
                u - 0.5 * math::ln(1.0 + u)
            }),
            grad: Arc::new(|z: Complex64| {
                let u = z.norm_sqr();
                z.conj() * (1.0 - 0.5 / (1.0 + u))
            }),
            m: 1.0,
            m_upper: 17.0 / 8.0,
        }
    }

    pub fn custom(
        eval: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
        grad: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        m: f64,
        m_upper: f64,
    ) -> Result<Self> {
        if !(m > 0.0 && m <= m_upper) {
            return Err(invalid("hessian bounds must satisfy 0 < m <= M"));
        }
        Ok(Weight {
            kind: WeightKind::Custom,
            eval: Arc::new(eval),
            grad: Arc::new(grad),
            m,
            m_upper,
        })
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> f64 {
        (self.eval)(z)
    }

    /// Wirtinger gradient `d phi / d z`.
    #[inline]
    pub fn wirtinger_gradient(&self, z: Complex64) -> Complex64 {
        (self.grad)(z)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// `Some(alpha)` for the standard weight, `None` otherwise.
    pub fn standard_alpha(&self) -> Option<f64> {
        match self.kind {
            WeightKind::Standard { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Eigenvalues of the central-difference 2x2 real Hessian at `z`.
    pub fn hessian_eigenvalues(&self, z: Complex64, step: f64) -> (f64, f64) {
        let f = |x: f64, y: f64| self.eval(Complex64::new(x, y));
        let (x, y) = (z.re, z.im);
        let h = step;
        let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h))
            / (4.0 * h * h);
        let tr = fxx + fyy;
        let disc = math::sqrt((fxx - fyy) * (fxx - fyy) + 4.0 * fxy * fxy);
        (0.5 * (tr - disc), 0.5 * (tr + disc))
    }

    /// Check the certified bounds against numerically differenced Hessians on
    /// a sample grid; slack is `1e-4 * M` per the type invariant.
    pub fn verify_hessian_bounds(&self, samples: &[Complex64]) -> Result<()> {
        let slack = 1e-4 * self.m_upper;
        // Differencing loses ~half the digits; 1e-4 balances truncation
        // against roundoff for O(1) second derivatives.
        let step = 1e-4;
        for &z in samples {
            let (lo, hi) = self.hessian_eigenvalues(z, step);
            if lo < self.m - slack || hi > self.m_upper + slack {
                return Err(invalid(alloc::format!(
                    "hessian eigenvalues [{lo:.6}, {hi:.6}] at z = {}+{}i escape [{}, {}]",
                    z.re,
                    z.im,
                    self.m,
                    self.m_upper
                )));
            }
        }
        Ok(())
    }
}

/// Default Hessian-verification sample grid: a coarse mesh on [-L, L]^2.
pub fn hessian_sample_grid(extent: f64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = -extent + 2.0 * extent * (i as f64 + 0.5) / n as f64;
            let y = -extent + 2.0 * extent * (j as f64 + 0.5) / n as f64;
            out.push(Complex64::new(x, y));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn standard_weight_formulas() {
        let w = Weight::standard(2.0).unwrap();
        let z = c64(1.5, -0.5);
        assert!((w.eval(z) - z.norm_sqr()).abs() < 1e-15);
        assert!((w.wirtinger_gradient(z) - z.conj()).norm() < 1e-15);
        assert_eq!(w.standard_alpha(), Some(2.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Weight::standard(0.0).is_err());
        assert!(Weight::custom(|_| 0.0, |_| Complex64::new(0.0, 0.0), 1.0, 0.5).is_err());
    }

    #[test]
    fn standard_hessian_is_alpha_times_identity() {
        let w = Weight::standard(1.0).unwrap();
        w.verify_hessian_bounds(&hessian_sample_grid(4.0, 7)).unwrap();
    }

    #[test]
    fn fock_sobolev_bounds_hold_on_grid() {
        let w = Weight::fock_sobolev();
        w.verify_hessian_bounds(&hessian_sample_grid(5.0, 9)).unwrap();
        // Radial eigenvalue peaks at |z|^2 = 3 with value 17/8; hit it.
        let (lo, hi) = w.hessian_eigenvalues(c64(3f64.sqrt(), 0.0), 1e-4);
        assert!(lo > 0.9 && hi < 17.0 / 8.0 + 1e-3, "({lo}, {hi})");
        assert!((hi - 17.0 / 8.0).abs() < 1e-3);
    }

    #[test]
    fn nonradial_custom_weight_passes_with_declared_bounds() {
        // |z|^2 + sin(Re z): eigenvalues 2 and 2 - sin x, inside [1, 3].
        let w = Weight::custom(
            |z| z.norm_sqr() + z.re.sin(),
            |z| z.conj() + Complex64::new(0.5 * z.re.cos(), 0.0),
            1.0,
            3.0,
        )
        .unwrap();
        w.verify_hessian_bounds(&hessian_sample_grid(4.0, 9)).unwrap();
    }
}
