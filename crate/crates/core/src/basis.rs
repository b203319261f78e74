//! Truncated orthonormal monomial basis `e_k(z) = c_k z^k` for the standard
//! weight, with `c_k = (alpha^{k+1} / (pi k!))^{1/2}` from the moment identity
//! `int |z|^{2k} e^{-alpha|z|^2} dv = pi k! / alpha^{k+1}`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::math;
use crate::quadrature::PlaneRule;
use crate::sum;
use crate::weight::Weight;

#[derive(Clone)]
pub struct FockBasis {
    pub alpha: f64,
    /// Degree cutoff `N`; the basis spans degrees `0..=N`.
    pub degree: usize,
    /// Normalization constants `c_k`.
    pub c: Vec<f64>,
}

impl FockBasis {
    pub fn new(alpha: f64, degree: usize) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(invalid("basis alpha must be > 0"));
        }
        let mut c = Vec::with_capacity(degree + 1);
        let mut ck = math::sqrt(alpha / core::f64::consts::PI);
        c.push(ck);
        for k in 1..=degree {
            ck *= math::sqrt(alpha / k as f64);
            c.push(ck);
        }
        Ok(FockBasis { alpha, degree, c })
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The weight this basis is orthonormal for.
    pub fn weight(&self) -> Weight {
        Weight::standard(self.alpha).expect("alpha validated at construction")
    }

    /// Ratio `c_k / c_{k-1}` from the stored constants, so every evaluator
    /// reflects the normalization actually held by the basis.
    #[inline]
    fn step(&self, k: usize) -> f64 {
        self.c[k] / self.c[k - 1]
    }

    /// `e_k(z)`; large intermediate magnitudes for big `k` and `|z|`, prefer
    /// [`FockBasis::eval_weighted`] where a Gaussian factor is available.
    pub fn eval(&self, k: usize, z: Complex64) -> Complex64 {
        let mut v = Complex64::new(self.c[0], 0.0);
        for j in 1..=k {
            v *= z * self.step(j);
        }
        v
    }

    /// All of `e_k(z) e^{-phi(z)}`, `k = 0..=N`, by the stable weighted
    /// recurrence (every intermediate stays O(1)).
    pub fn eval_weighted(&self, z: Complex64, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.len());
        let phi = 0.5 * self.alpha * z.norm_sqr();
        let mut v = Complex64::new(self.c[0] * math::exp(-phi), 0.0);
        out[0] = v;
        for k in 1..=self.degree {
            v *= z * self.step(k);
            out[k] = v;
        }
    }

    /// Evaluate the combination `sum c_k e_k(z)` by the stepwise recurrence.
    pub fn eval_combination(&self, coeffs: &[Complex64], z: Complex64) -> Complex64 {
        debug_assert!(coeffs.len() <= self.len());
        let mut val = Complex64::new(0.0, 0.0);
        let mut ek = Complex64::new(self.c[0], 0.0);
        for (k, &ck) in coeffs.iter().enumerate() {
            if k > 0 {
                ek *= z * self.step(k);
            }
            val += ck * ek;
        }
        val
    }
}

/// Sampled basis matrix on a plane rule: `U[n][k] = e_k(z_n) e^{-phi(z_n)}
/// sqrt(w_n)`. With it, Gram matrices are `U^H U` and projection coefficients
/// are `U^H s` for `s_n = f(z_n) e^{-phi(z_n)} sqrt(w_n)`.
pub struct BasisMatrix {
    pub n_nodes: usize,
    pub n_basis: usize,
    /// Row-major `n_nodes x n_basis`.
    data: Vec<Complex64>,
}

impl BasisMatrix {
    pub fn build(basis: &FockBasis, rule: &PlaneRule) -> Self {
        let n_nodes = rule.len();
        let n_basis = basis.len();
        let mut data = alloc::vec![Complex64::new(0.0, 0.0); n_nodes * n_basis];
        let mut row = alloc::vec![Complex64::new(0.0, 0.0); n_basis];
        for (n, (&z, &w)) in rule.nodes.iter().zip(rule.weights.iter()).enumerate() {
            basis.eval_weighted(z, &mut row);
            let sw = math::sqrt(w);
            for k in 0..n_basis {
                data[n * n_basis + k] = row[k] * sw;
            }
        }
        BasisMatrix {
            n_nodes,
            n_basis,
            data,
        }
    }

    #[inline]
    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.data[n * self.n_basis..(n + 1) * self.n_basis]
    }

    /// `U^H s`: projection coefficients from scaled samples, deterministic
    /// block-pairwise reduction over nodes.
    pub fn coeffs(&self, scaled_samples: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(scaled_samples.len(), self.n_nodes);
        let mut out = Vec::with_capacity(self.n_basis);
        for k in 0..self.n_basis {
            out.push(sum::pairwise_c64_iter(self.n_nodes, |n| {
                self.data[n * self.n_basis + k].conj() * scaled_samples[n]
            }));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn normalization_constants_match_the_moment_oracle() {
        // c_k^2 * pi k! / alpha^{k+1} = 1.
        let b = FockBasis::new(1.0, 12).unwrap();
        let mut fact = 1.0;
        for k in 0..=12 {
            if k > 0 {
                fact *= k as f64;
            }
            let norm2 = b.c[k] * b.c[k] * core::f64::consts::PI * fact;
            assert!((norm2 - 1.0).abs() < 1e-12, "k={k}: {norm2}");
        }
    }

    #[test]
    fn constants_strictly_decrease_past_alpha() {
        let alpha = 2.0;
        let b = FockBasis::new(alpha, 40).unwrap();
        let start = (alpha * core::f64::consts::E).ceil() as usize;
        for k in start..40 {
            assert!(b.c[k + 1] < b.c[k], "c must decay past alpha*e (k={k})");
        }
        assert!(b.c.iter().all(|&c| c > 0.0));
    }

    #[test]
    fn weighted_evaluation_matches_direct_evaluation() {
        let b = FockBasis::new(1.0, 20).unwrap();
        let z = c64(1.3, -2.1);
        let mut wv = alloc::vec![c64(0.0, 0.0); b.len()];
        b.eval_weighted(z, &mut wv);
        let phi = 0.5 * z.norm_sqr();
        for k in [0usize, 3, 11, 20] {
            let direct = b.eval(k, z) * (-phi).exp();
            assert!((direct - wv[k]).norm() < 1e-12 * wv[k].norm().max(1e-30));
        }
    }

    #[test]
    fn combination_evaluation() {
        let b = FockBasis::new(1.0, 5).unwrap();
        let coeffs = alloc::vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(-2.0, 1.0)];
        let z = c64(0.7, 0.4);
        let want = b.eval(0, z) + c64(-2.0, 1.0) * b.eval(2, z);
        assert!((b.eval_combination(&coeffs, z) - want).norm() < 1e-13);
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        assert!(FockBasis::new(-1.0, 3).is_err());
    }
}
