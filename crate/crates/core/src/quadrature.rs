//! Quadrature rules: Gauss-Legendre nodes, the truncated plane rule used for
//! Gaussian-weighted integrals, and the unit-disk rule used for ball means.
//!
//! The plane rule integrates against plain Lebesgue measure `dv = dx dy` on a
//! disk of radius `r_max`; weights `e^{-p phi}` are part of the integrand, not
//! the rule. Polar is the default scheme: Gauss-Legendre radially on
//! `[0, r_max]` mapped by `r^2`, uniform angles. The angular count `4N + 16`
//! integrates monomial products up to degree `2N` exactly (and then some); the
//! radial count follows an empirical rule pinned by the compliance and
//! node-doubling tests.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::sum;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the recurrence; accurate to ~1e-15 for n up to a few
/// thousand.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess.
        let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' at x by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n, p0 = P_{n-1}
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if math::abs(dx) < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss-Legendre nodes and weights transplanted to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&wi| wi * half).collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Polar,
    Tensor,
}

/// Quadrature over the disk `|z| <= r_max` against Lebesgue measure.
#[derive(Clone)]
pub struct PlaneRule {
    pub scheme: Scheme,
    pub r_max: f64,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl PlaneRule {
    /// Polar rule: radial Gauss-Legendre on `[0, r_max]` through the `u = r^2`
    /// substitution, uniform angles. Nodes are ordered ring-major (outermost
    /// ring last).
    pub fn polar(r_max: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        if !(r_max > 0.0) || n_radial == 0 || n_angular == 0 {
            return Err(invalid("polar rule needs r_max > 0 and nonzero node counts"));
        }
        let (u, wu) = gauss_legendre_on(n_radial, 0.0, r_max * r_max);
        let dtheta = 2.0 * core::f64::consts::PI / n_angular as f64;
        let mut nodes = Vec::with_capacity(n_radial * n_angular);
        let mut weights = Vec::with_capacity(n_radial * n_angular);
        for i in 0..n_radial {
            let r = math::sqrt(u[i]);
            let w = 0.5 * wu[i] * dtheta;
            for j in 0..n_angular {
                let th = dtheta * j as f64;
                nodes.push(Complex64::new(r * math::cos(th), r * math::sin(th)));
                weights.push(w);
            }
        }
        Ok(PlaneRule {
            scheme: Scheme::Polar,
            r_max,
            nodes,
            weights,
            n_radial,
            n_angular,
        })
    }

    /// Tensor rule: Gauss-Legendre x Gauss-Legendre over the inscribed square
    /// `[-r_max/sqrt(2), r_max/sqrt(2)]^2`, so every node stays inside the
    /// disk of radius `r_max`.
    pub fn tensor(r_max: f64, n_side: usize) -> Result<Self> {
        if !(r_max > 0.0) || n_side == 0 {
            return Err(invalid("tensor rule needs r_max > 0 and a nonzero side count"));
        }
        let a = r_max / math::sqrt(2.0);
        let (x, wx) = gauss_legendre_on(n_side, -a, a);
        let mut nodes = Vec::with_capacity(n_side * n_side);
        let mut weights = Vec::with_capacity(n_side * n_side);
        for j in 0..n_side {
            for i in 0..n_side {
                nodes.push(Complex64::new(x[i], x[j]));
                weights.push(wx[i] * wx[j]);
            }
        }
        Ok(PlaneRule {
            scheme: Scheme::Tensor,
            r_max,
            nodes,
            weights,
            n_radial: n_side,
            n_angular: n_side,
        })
    }

    /// Truncation radius rule: basis Gaussian envelope plus six standard
    /// deviations, `r_max = sqrt(2(N+1)/alpha) + 6/sqrt(alpha)`.
    pub fn truncation_radius(alpha: f64, degree: usize) -> f64 {
        math::sqrt(2.0 * (degree as f64 + 1.0) / alpha) + 6.0 / math::sqrt(alpha)
    }

    /// Default rule for a degree-`n` basis with weight parameter `alpha`:
    /// polar, `4N + 16` angles, radial count sized so that `u^N e^{-alpha u}`
    /// integrands converge past the compliance tolerances.
    pub fn for_basis(alpha: f64, degree: usize) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(invalid("alpha must be > 0"));
        }
        let r_max = Self::truncation_radius(alpha, degree);
        let n_radial = Self::radial_count(alpha, degree);
        let n_angular = 4 * degree + 16;
        Self::polar(r_max, n_radial, n_angular)
    }

    pub fn radial_count(alpha: f64, degree: usize) -> usize {
        let r_max = Self::truncation_radius(alpha, degree);
        let c = math::ceil(0.4 * alpha * r_max * r_max) as usize + degree + 16;
        c.max(64)
    }

    /// Same extent and scheme with roughly doubled node counts (for the
    /// convergence invariant).
    pub fn doubled(&self) -> Result<Self> {
        match self.scheme {
            Scheme::Polar => Self::polar(self.r_max, 2 * self.n_radial, 2 * self.n_angular),
            Scheme::Tensor => Self::tensor(self.r_max, 2 * self.n_radial),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `| quad(e^{-alpha |z|^2}) - pi/alpha |`; the type invariant demands
    /// `< 1e-8` at `alpha = 1`.
    pub fn compliance_error(&self, alpha: f64) -> f64 {
        let total = sum::pairwise_f64_iter(self.len(), |i| {
            self.weights[i] * math::exp(-alpha * self.nodes[i].norm_sqr())
        });
        math::abs(total - core::f64::consts::PI / alpha)
    }

    /// Integrate a complex integrand sampled at the nodes.
    pub fn integrate(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Complex64 {
        sum::pairwise_c64_iter(self.len(), |i| f(self.nodes[i]) * self.weights[i])
    }

    /// Integrate a real integrand sampled at the nodes.
    pub fn integrate_real(&self, mut f: impl FnMut(Complex64) -> f64) -> f64 {
        sum::pairwise_f64_iter(self.len(), |i| f(self.nodes[i]) * self.weights[i])
    }

    /// Indices of the outermost radial ring (used by assembly growth checks).
    pub fn outer_ring(&self) -> core::ops::Range<usize> {
        match self.scheme {
            Scheme::Polar => (self.len() - self.n_angular)..self.len(),
            // For the tensor rule take the last row; the growth check only
            // needs a boundary band.
            Scheme::Tensor => (self.len() - self.n_radial)..self.len(),
        }
    }
}

/// Reference quadrature on the closed unit disk (area measure, total mass pi).
///
/// Ball integrals are computed by scaling: `int_{B(z,r)} g dv =
/// r^2 sum w_i g(z + r v_i)`.
#[derive(Clone)]
pub struct DiskRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl DiskRule {
    pub fn new(n_radial: usize, n_angular: usize) -> Self {
        let (rho, wr) = gauss_legendre_on(n_radial, 0.0, 1.0);
        let dtheta = 2.0 * core::f64::consts::PI / n_angular as f64;
        let mut nodes = Vec::with_capacity(n_radial * n_angular);
        let mut weights = Vec::with_capacity(n_radial * n_angular);
        for i in 0..n_radial {
            for j in 0..n_angular {
                let th = dtheta * j as f64;
                nodes.push(Complex64::new(rho[i] * math::cos(th), rho[i] * math::sin(th)));
                weights.push(wr[i] * rho[i] * dtheta);
            }
        }
        DiskRule {
            nodes,
            weights,
            n_radial,
            n_angular,
        }
    }

    /// Default ball rule: exact for monomial products past the local degrees
    /// used anywhere in the crate.
    pub fn default_rule() -> Self {
        Self::new(32, 64)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int_{B(z,r)} g dv` by the scaled rule.
    pub fn integrate(
        &self,
        z: Complex64,
        r: f64,
        mut g: impl FnMut(Complex64) -> Complex64,
    ) -> Complex64 {
        let s = r * r;
        sum::pairwise_c64_iter(self.len(), |i| {
            g(z + r * self.nodes[i]) * (self.weights[i] * s)
        })
    }

    /// Real variant of [`DiskRule::integrate`], with a finiteness check.
    pub fn integrate_real_checked(
        &self,
        z: Complex64,
        r: f64,
        mut g: impl FnMut(Complex64) -> f64,
    ) -> Result<f64> {
        let s = r * r;
        let mut bad: Option<usize> = None;
        let v = sum::pairwise_f64_iter(self.len(), |i| {
            let x = g(z + r * self.nodes[i]);
            if !x.is_finite() && bad.is_none() {
                bad = Some(i);
            }
            x * self.weights[i] * s
        });
        match bad {
            Some(i) => Err(Error::NonFiniteSample {
                index: i,
                at: z + r * self.nodes[i],
            }),
            None => Ok(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use core::f64::consts::PI;

    #[test]
    fn gauss_legendre_small_orders_match_known_values() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x3, w3) = gauss_legendre(3);
        assert!((x3[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!((w3[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!(x3[1].abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_high_degree_polynomials_exactly() {
        let n = 40;
        let (x, w) = gauss_legendre(n);
        // x^78 over [-1,1] = 2/79.
        let got: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(78)).sum();
        assert!((got - 2.0 / 79.0).abs() < 1e-14);
    }

    #[test]
    fn polar_rule_is_compliant_for_the_gaussian() {
        let rule = PlaneRule::for_basis(1.0, 60).unwrap();
        assert!(rule.compliance_error(1.0) < 1e-8, "{}", rule.compliance_error(1.0));
        assert!(rule.nodes.iter().all(|z| z.norm() <= rule.r_max + 1e-12));
    }

    #[test]
    fn tensor_rule_is_compliant_for_the_gaussian() {
        let r_max = PlaneRule::truncation_radius(1.0, 24);
        let rule = PlaneRule::tensor(r_max, 160).unwrap();
        assert!(rule.compliance_error(1.0) < 1e-8, "{}", rule.compliance_error(1.0));
        assert!(rule.nodes.iter().all(|z| z.norm() <= r_max + 1e-12));
    }

    #[test]
    fn polar_rule_integrates_gaussian_moments() {
        // int |z|^2 e^{-|z|^2} dv = pi, int |z|^4 e^{-|z|^2} dv = 2 pi.
        let rule = PlaneRule::for_basis(1.0, 30).unwrap();
        let m2 = rule.integrate_real(|z| z.norm_sqr() * (-z.norm_sqr()).exp());
        let m4 = rule.integrate_real(|z| z.norm_sqr().powi(2) * (-z.norm_sqr()).exp());
        assert!((m2 - PI).abs() < 1e-10);
        assert!((m4 - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(PlaneRule::polar(-1.0, 4, 4).is_err());
        assert!(PlaneRule::polar(1.0, 0, 4).is_err());
        assert!(PlaneRule::tensor(1.0, 0).is_err());
    }

    #[test]
    fn disk_rule_total_mass_and_moments() {
        let rule = DiskRule::default_rule();
        let mass: f64 = rule.weights.iter().sum();
        assert!((mass - PI).abs() < 1e-12);
        // int_{B(0,1)} |v|^2 dv = pi/2; scaled ball of radius 2 gives 8 pi...
        // int_{B(0,2)} |v|^2 dv = 2 pi * 2^4 / 4 = 8 pi.
        let m = rule
            .integrate(c64(0.0, 0.0), 2.0, |v| c64(v.norm_sqr(), 0.0))
            .re;
        assert!((m - 8.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn disk_rule_reports_non_finite_nodes() {
        let rule = DiskRule::new(4, 8);
        let err = rule
            .integrate_real_checked(c64(0.0, 0.0), 1.0, |v| 1.0 / (v.re - v.re))
            .unwrap_err();
        match err {
            crate::Error::NonFiniteSample { .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn doubling_preserves_gaussian_integrals() {
        let rule = PlaneRule::for_basis(1.0, 20).unwrap();
        let fine = rule.doubled().unwrap();
        let f = |z: Complex64| (-z.norm_sqr()).exp() * (1.0 + z.re * z.re);
        let a = rule.integrate_real(f);
        let b = fine.integrate_real(f);
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}
