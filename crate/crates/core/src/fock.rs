//! Reproducing kernel, inner products, norms and the orthogonal projection
//! for the standard weight (custom weights are quadrature-only and rejected by
//! the closed-form operations).

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::basis::{BasisMatrix, FockBasis};
use crate::error::{invalid, Error, Result};
use crate::math;
use crate::quadrature::{DiskRule, PlaneRule};
use crate::sum;
use crate::weight::Weight;

/// Reproducing kernel `K(z, w) = (alpha/pi) exp(alpha z conj(w))`:
/// holomorphic in `z`, conjugate-linear in the center `w`.
pub fn kernel(z: Complex64, w: Complex64, alpha: f64) -> Result<Complex64> {
    if !(alpha > 0.0) {
        return Err(invalid("kernel alpha must be > 0"));
    }
    Ok((alpha / core::f64::consts::PI) * (alpha * z * w.conj()).exp())
}

/// `|K(z,w)| e^{-phi(z) - phi(w)}`, computed through the kernel itself
/// (one route of the Gaussian-decay identity check).
pub fn kernel_weighted_modulus(z: Complex64, w: Complex64, alpha: f64) -> Result<f64> {
    let k = kernel(z, w, alpha)?;
    let phi = 0.5 * alpha;
    Ok(k.norm() * math::exp(-phi * z.norm_sqr() - phi * w.norm_sqr()))
}

/// Normalized kernel `k_w = K(., w) / sqrt(K(w, w))` as a closure.
pub fn normalized_kernel(
    w: Complex64,
    alpha: f64,
) -> Result<impl Fn(Complex64) -> Complex64 + Send + Sync + Clone> {
    if !(alpha > 0.0) {
        return Err(invalid("normalized_kernel alpha must be > 0"));
    }
    // k_w(xi) = sqrt(alpha/pi) exp(alpha xi conj(w) - alpha |w|^2 / 2)
    let scale = math::sqrt(alpha / core::f64::consts::PI);
    let half = 0.5 * alpha * w.norm_sqr();
    Ok(move |xi: Complex64| scale * (alpha * xi * w.conj() - half).exp())
}

/// Weighted inner product `<f, g> = int f conj(g) e^{-2 phi} dv` over the
/// rule's disk. Conjugate-symmetric bit-for-bit under the fixed reduction.
pub fn inner(
    rule: &PlaneRule,
    weight: &Weight,
    mut f: impl FnMut(Complex64) -> Complex64,
    mut g: impl FnMut(Complex64) -> Complex64,
) -> Result<Complex64> {
    let mut bad: Option<usize> = None;
    let v = sum::pairwise_c64_iter(rule.len(), |i| {
        let z = rule.nodes[i];
        let t = f(z) * g(z).conj() * (math::exp(-2.0 * weight.eval(z)) * rule.weights[i]);
        if bad.is_none() && (!t.re.is_finite() || !t.im.is_finite()) {
            bad = Some(i);
        }
        t
    });
    match bad {
        Some(i) => Err(Error::NonFiniteSample {
            index: i,
            at: rule.nodes[i],
        }),
        None => Ok(v),
    }
}

/// `( int |f|^p e^{-p phi} dv )^{1/p}`, `0 < p < infinity`.
pub fn norm_p(
    rule: &PlaneRule,
    weight: &Weight,
    p: f64,
    mut f: impl FnMut(Complex64) -> Complex64,
) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid("norm_p requires 0 < p < infinity"));
    }
    let mut bad: Option<usize> = None;
    let total = sum::pairwise_f64_iter(rule.len(), |i| {
        let z = rule.nodes[i];
        let t = math::powf(f(z).norm(), p) * math::exp(-p * weight.eval(z)) * rule.weights[i];
        if bad.is_none() && !t.is_finite() {
            bad = Some(i);
        }
        t
    });
    match bad {
        Some(i) => Err(Error::NonFiniteSample {
            index: i,
            at: rule.nodes[i],
        }),
        None => Ok(math::powf(total, 1.0 / p)),
    }
}

/// Scaled samples `s_n = f(z_n) e^{-phi(z_n)} sqrt(w_n)`, the vector paired
/// with [`BasisMatrix`] columns in every projection and Gram assembly.
pub fn scaled_samples(
    rule: &PlaneRule,
    weight: &Weight,
    mut f: impl FnMut(Complex64) -> Complex64,
) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(rule.len());
    for (i, (&z, &w)) in rule.nodes.iter().zip(rule.weights.iter()).enumerate() {
        let s = f(z) * (math::exp(-weight.eval(z)) * math::sqrt(w));
        if !s.re.is_finite() || !s.im.is_finite() {
            return Err(Error::NonFiniteSample { index: i, at: z });
        }
        out.push(s);
    }
    Ok(out)
}

/// Projection coefficients `c_k = <f, e_k>` onto the truncated basis.
///
/// The basis is a standard-weight object; non-standard weights are rejected,
/// and the weight parameter must match the basis.
pub fn project(
    rule: &PlaneRule,
    weight: &Weight,
    basis: &FockBasis,
    mat: &BasisMatrix,
    f: impl FnMut(Complex64) -> Complex64,
) -> Result<Vec<Complex64>> {
    let alpha = weight
        .standard_alpha()
        .ok_or(Error::UnsupportedWeight { op: "project" })?;
    if (alpha - basis.alpha).abs() > 1e-12 {
        return Err(invalid("basis and weight must share alpha"));
    }
    let s = scaled_samples(rule, weight, f)?;
    Ok(mat.coeffs(&s))
}

/// Gram matrix of the truncated basis under the rule, as `U^H U`.
pub fn gram_matrix(mat: &BasisMatrix) -> crate::linalg::CMat {
    let nb = mat.n_basis;
    crate::linalg::CMat::from_fn(nb, nb, |j, k| {
        sum::pairwise_c64_iter(mat.n_nodes, |n| mat.row(n)[j].conj() * mat.row(n)[k])
    })
}

/// Worst-case pointwise-over-ball ratio
/// `max_z |f(z) e^{-phi(z)}|^p / int_{B(z,r)} |f e^{-phi}|^p dv`.
pub fn bergman_inequality_check(
    disk: &DiskRule,
    weight: &Weight,
    p: f64,
    r: f64,
    centers: &[Complex64],
    mut f: impl FnMut(Complex64) -> Complex64,
) -> Result<f64> {
    if !(p > 0.0) || !(r > 0.0) {
        return Err(invalid("bergman_inequality_check requires p > 0 and r > 0"));
    }
    let mut worst = 0.0f64;
    for &z in centers {
        let num = math::powf(f(z).norm() * math::exp(-weight.eval(z)), p);
        let den = disk.integrate_real_checked(z, r, |xi| {
            math::powf(f(xi).norm() * math::exp(-weight.eval(xi)), p)
        })?;
        if den > 0.0 {
            let ratio = num / den;
            if ratio > worst {
                worst = ratio;
            }
        }
    }
    Ok(worst)
}
