//! Local integral distance to holomorphic functions and everything built on
//! it: ball means, the local best fit (exact orthogonal projection at q = 2,
//! IRLS otherwise), G-fields and their L^s seminorms, decay probes, the
//! two-route symbol decompositions with certified ratios, and the mean
//! oscillation functionals.
//!
//! Local fits live on the disk-orthonormal monomial basis
//! `phi_k(w) = sqrt((k+1)/pi) ((w-z)/r)^k / r`, which makes the q = 2 case an
//! analytic inner product and conditions the IRLS normal equations.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::{make_lattice, make_partition, PartitionOfUnity};
use crate::linalg::{lu_solve, CMat};
use crate::math;
use crate::quadrature::DiskRule;
use crate::sum;
use crate::symbol::Symbol;

/// Spacing of seminorm / certificate sampling grids.
pub const SEMINORM_SPACING: f64 = 0.5;
/// Quadrature resolution guard for small-scale scans (min r >= 2x this).
pub const RESOLUTION_GUARD: f64 = 0.01;
/// Degree sweep stabilization tolerance.
pub const DEGREE_SWEEP_TOL: f64 = 1e-4;

/// Exponent bookkeeping for the operator-domain pair `(p, q)`: the seminorm
/// exponent is `s = pq/(p-q)` when `p > q` and the sup norm otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentTriple {
    pub p: f64,
    pub q: f64,
    pub s: f64,
}

impl ExponentTriple {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && q > 0.0) {
            return Err(invalid("exponents must be positive"));
        }
        let s = if p > q { p * q / (p - q) } else { f64::INFINITY };
        Ok(ExponentTriple { p, q, s })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LocalApproxConfig {
    pub q: f64,
    pub r: f64,
    /// Local polynomial degree `d`.
    pub degree: usize,
    pub irls_max_iter: usize,
    /// Relative objective-change tolerance.
    pub irls_tol: f64,
    /// Regularizer factor: `eps_w = factor * M_{q,r}(f)(z)`.
    pub eps_w_factor: f64,
}

impl LocalApproxConfig {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) || !(r > 0.0 && r.is_finite()) {
            return Err(invalid("local fit requires q > 0 and r > 0"));
        }
        Ok(LocalApproxConfig {
            q,
            r,
            degree: 6,
            irls_max_iter: 50,
            irls_tol: 1e-8,
            eps_w_factor: 1e-6,
        })
    }

    pub fn with_degree(mut self, d: usize) -> Self {
        self.degree = d;
        self
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        self.r = r;
        self
    }
}

/// Result of a local holomorphic fit on `B(z, r)`.
#[derive(Clone, Debug)]
pub struct LocalFit {
    pub center: Complex64,
    pub radius: f64,
    pub q: f64,
    pub degree: usize,
    /// Coefficients in the disk-orthonormal basis.
    pub coeffs: Vec<Complex64>,
    /// Achieved `M_{q,r}(f - h)(z)`.
    pub achieved: f64,
    /// False when IRLS hit the iteration cap (result carries the last iterate).
    pub converged: bool,
    /// Set for q < 1: the objective is nonconvex, the value is an upper bound.
    pub upper_bound_only: bool,
    pub residual_history: Vec<f64>,
    /// `sup_{B(z,r/2)} |h| / ||f||_{L^q(B(z,r))}` (finite-C record).
    pub sup_half_ratio: f64,
}

impl LocalFit {
    #[inline]
    fn scale(&self, k: usize) -> f64 {
        math::sqrt((k as f64 + 1.0) / core::f64::consts::PI) / self.radius
    }

    /// `h(w)`.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let v = (w - self.center) / self.radius;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pw = Complex64::new(1.0, 0.0);
        for (k, &c) in self.coeffs.iter().enumerate() {
            acc += c * self.scale(k) * pw;
            pw *= v;
        }
        acc
    }

    /// `dh/dw`.
    pub fn eval_d_z(&self, w: Complex64) -> Complex64 {
        let v = (w - self.center) / self.radius;
        let mut acc = Complex64::new(0.0, 0.0);
        // pw tracks v^{k-1} for the k-th term
        let mut pw = Complex64::new(1.0, 0.0);
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            acc += c * (self.scale(k) * k as f64 / self.radius) * pw;
            pw *= v;
        }
        acc
    }
}

/// q-th mean of `|f|` over `B(z, r)`.
pub fn mean_m(disk: &DiskRule, f: &Symbol, q: f64, r: f64, z: Complex64) -> Result<f64> {
    if !(q > 0.0) || !(r > 0.0) {
        return Err(invalid("mean_m requires q > 0 and r > 0"));
    }
    let total = disk.integrate_real_checked(z, r, |w| math::powf(f.eval(w).norm(), q))?;
    Ok(math::powf(
        total / (core::f64::consts::PI * r * r),
        1.0 / q,
    ))
}

/// Ball average `f_{B(z,r)}`.
pub fn ball_average(disk: &DiskRule, f: &Symbol, r: f64, z: Complex64) -> Result<Complex64> {
    let total = disk.integrate(z, r, |w| f.eval(w));
    let v = total / (core::f64::consts::PI * r * r);
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::NonFiniteSample { index: 0, at: z });
    }
    Ok(v)
}

struct DiskDesign {
    /// `v_i^k`, node-major.
    powers: Vec<Complex64>,
    degree: usize,
}

impl DiskDesign {
    fn new(disk: &DiskRule, degree: usize) -> Self {
        let n = disk.len();
        let mut powers = Vec::with_capacity(n * (degree + 1));
        for &v in &disk.nodes {
            let mut pw = Complex64::new(1.0, 0.0);
            for _ in 0..=degree {
                powers.push(pw);
                pw *= v;
            }
        }
        DiskDesign { powers, degree }
    }

    #[inline]
    fn row(&self, i: usize) -> &[Complex64] {
        &self.powers[i * (self.degree + 1)..(i + 1) * (self.degree + 1)]
    }
}

fn fit_samples(disk: &DiskRule, f: &Symbol, z: Complex64, r: f64) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(disk.len());
    for (i, &v) in disk.nodes.iter().enumerate() {
        let w = z + r * v;
        let val = f.eval(w);
        if !val.re.is_finite() || !val.im.is_finite() {
            return Err(Error::NonFiniteSample { index: i, at: w });
        }
        out.push(val);
    }
    Ok(out)
}

/// Weighted normal equations in the orthonormal basis: solve
/// `(Phi^H A Phi) c = Phi^H A f` where `A = diag(a_i)`.
fn weighted_ls(
    disk: &DiskRule,
    design: &DiskDesign,
    samples: &[Complex64],
    a: &[f64],
    r: f64,
) -> Result<Vec<Complex64>> {
    let d1 = design.degree + 1;
    let n = disk.len();
    // phi_k(w_i) = s_k v_i^k with s_k = sqrt((k+1)/pi)/r.
    let s: Vec<f64> = (0..d1)
        .map(|k| math::sqrt((k as f64 + 1.0) / core::f64::consts::PI) / r)
        .collect();
    let gram = CMat::from_fn(d1, d1, |j, k| {
        s[j] * s[k]
            * sum::pairwise_c64_iter(n, |i| {
                let row = design.row(i);
                row[j].conj() * row[k] * a[i]
            })
    });
    let rhs: Vec<Complex64> = (0..d1)
        .map(|j| {
            s[j] * sum::pairwise_c64_iter(n, |i| design.row(i)[j].conj() * samples[i] * a[i])
        })
        .collect();
    lu_solve(&gram, &rhs)
}

fn objective_mq(
    disk: &DiskRule,
    design: &DiskDesign,
    coeffs: &[Complex64],
    samples: &[Complex64],
    q: f64,
    r: f64,
) -> f64 {
    let d1 = design.degree + 1;
    let s: Vec<f64> = (0..d1)
        .map(|k| math::sqrt((k as f64 + 1.0) / core::f64::consts::PI) / r)
        .collect();
    let total = sum::pairwise_f64_iter(disk.len(), |i| {
        let row = design.row(i);
        let mut h = Complex64::new(0.0, 0.0);
        for k in 0..d1 {
            h += coeffs[k] * s[k] * row[k];
        }
        math::powf((samples[i] - h).norm(), q) * disk.weights[i] * r * r
    });
    math::powf(total / (core::f64::consts::PI * r * r), 1.0 / q)
}

/// Best degree-`d` holomorphic fit minimizing `M_{q,r}(f - h)(z)`.
///
/// q = 2 is solved by plain least squares on the quadrature nodes (the
/// orthonormal basis makes the normal equations the identity up to quadrature
/// noise); other q run IRLS from the q = 2 iterate. q < 1 results carry the
/// upper-bound-only marker.
pub fn local_best_holo(
    disk: &DiskRule,
    f: &Symbol,
    cfg: &LocalApproxConfig,
    z: Complex64,
) -> Result<LocalFit> {
    let (q, r, d) = (cfg.q, cfg.r, cfg.degree);
    if !(q > 0.0) || !(r > 0.0) {
        return Err(invalid("local fit requires q > 0 and r > 0"));
    }
    let design = DiskDesign::new(disk, d);
    let samples = fit_samples(disk, f, z, r)?;
    let base_mean = mean_m(disk, f, q, r, z)?;
    let a0: Vec<f64> = disk.weights.iter().map(|w| w * r * r).collect();

    // Trivial ball: the zero fit is exact.
    if base_mean < 1e-14 {
        return Ok(finalize_fit(
            disk,
            &design,
            f,
            alloc::vec![Complex64::new(0.0, 0.0); d + 1],
            &samples,
            cfg,
            z,
            true,
            Vec::new(),
        ));
    }

    let ls = weighted_ls(disk, &design, &samples, &a0, r)?;
    if (q - 2.0).abs() < 1e-12 {
        return Ok(finalize_fit(disk, &design, f, ls, &samples, cfg, z, true, Vec::new()));
    }

    // IRLS with weights (|res|^2 + eps^2)^{(q-2)/2}.
    let eps = cfg.eps_w_factor * base_mean;
    let d1 = d + 1;
    let s: Vec<f64> = (0..d1)
        .map(|k| math::sqrt((k as f64 + 1.0) / core::f64::consts::PI) / r)
        .collect();
    let mut coeffs = ls;
    let mut history = Vec::new();
    let mut obj = objective_mq(disk, &design, &coeffs, &samples, q, r);
    history.push(obj);
    let mut converged = false;
    for _ in 0..cfg.irls_max_iter {
        let mut a = alloc::vec![0.0; disk.len()];
        for i in 0..disk.len() {
            let row = design.row(i);
            let mut h = Complex64::new(0.0, 0.0);
            for k in 0..d1 {
                h += coeffs[k] * s[k] * row[k];
            }
            let res2 = (samples[i] - h).norm_sqr() + eps * eps;
            a[i] = a0[i] * math::powf(res2, 0.5 * (q - 2.0));
        }
        coeffs = weighted_ls(disk, &design, &samples, &a, r)?;
        let new_obj = objective_mq(disk, &design, &coeffs, &samples, q, r);
        history.push(new_obj);
        let rel = math::abs(new_obj - obj) / obj.max(1e-300);
        obj = new_obj;
        if rel < cfg.irls_tol {
            converged = true;
            break;
        }
    }
    Ok(finalize_fit(
        disk, &design, f, coeffs, &samples, cfg, z, converged, history,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finalize_fit(
    disk: &DiskRule,
    design: &DiskDesign,
    f: &Symbol,
    coeffs: Vec<Complex64>,
    samples: &[Complex64],
    cfg: &LocalApproxConfig,
    z: Complex64,
    converged: bool,
    history: Vec<f64>,
) -> LocalFit {
    let achieved = objective_mq(disk, design, &coeffs, samples, cfg.q, cfg.r);
    let mut fit = LocalFit {
        center: z,
        radius: cfg.r,
        q: cfg.q,
        degree: cfg.degree,
        coeffs,
        achieved,
        converged,
        upper_bound_only: cfg.q < 1.0,
        residual_history: history,
        sup_half_ratio: 0.0,
    };
    // sup of |h| over B(z, r/2): maximum modulus puts it on the boundary circle.
    let mut sup = 0.0f64;
    for i in 0..128 {
        let th = 2.0 * core::f64::consts::PI * i as f64 / 128.0;
        let w = z + 0.5 * cfg.r * Complex64::new(math::cos(th), math::sin(th));
        sup = sup.max(fit.eval(w).norm());
    }
    let f_norm = {
        // ||f||_{L^q(B(z,r))} = M_{q,r}(f)(z) (pi r^2)^{1/q}
        let m = mean_m(disk, f, cfg.q, cfg.r, z).unwrap_or(0.0);
        m * math::powf(core::f64::consts::PI * cfg.r * cfg.r, 1.0 / cfg.q)
    };
    fit.sup_half_ratio = if f_norm > 1e-300 { sup / f_norm } else { 0.0 };
    fit
}

/// Local orthogonal projection `P_{z,r} f` truncated at degree `d`, through
/// the analytic disk-orthonormal inner products (the dual route to
/// [`local_best_holo`] at q = 2).
pub fn local_projection(
    disk: &DiskRule,
    f: &Symbol,
    z: Complex64,
    r: f64,
    degree: usize,
) -> Result<LocalFit> {
    if !(r > 0.0) {
        return Err(invalid("local_projection requires r > 0"));
    }
    let design = DiskDesign::new(disk, degree);
    let samples = fit_samples(disk, f, z, r)?;
    // c_k = int_B f conj(phi_k) dv = r s_k sum w_i r^2 ... with s_k folded in.
    let d1 = degree + 1;
    let mut coeffs = Vec::with_capacity(d1);
    for k in 0..d1 {
        let sk = math::sqrt((k as f64 + 1.0) / core::f64::consts::PI) / r;
        let v = sum::pairwise_c64_iter(disk.len(), |i| {
            samples[i] * design.row(i)[k].conj() * (disk.weights[i] * r * r * sk)
        });
        coeffs.push(v);
    }
    let cfg = LocalApproxConfig {
        q: 2.0,
        r,
        degree,
        irls_max_iter: 0,
        irls_tol: 0.0,
        eps_w_factor: 0.0,
    };
    Ok(finalize_fit(
        disk, &design, f, coeffs, &samples, &cfg, z, true, Vec::new(),
    ))
}

/// `G_{q,r}(f)(z)` at a fixed local degree.
pub fn g_value(disk: &DiskRule, f: &Symbol, cfg: &LocalApproxConfig, z: Complex64) -> Result<f64> {
    Ok(local_best_holo(disk, f, cfg, z)?.achieved)
}

/// Degree-swept G value: raises `d` by 2 until the value moves less than
/// [`DEGREE_SWEEP_TOL`]; reports the value, the degree used, and whether the
/// sweep stabilized before the cap.
pub fn g_stabilized(
    disk: &DiskRule,
    f: &Symbol,
    cfg: &LocalApproxConfig,
    z: Complex64,
    degree_cap: usize,
) -> Result<(f64, usize, bool)> {
    let mut d = cfg.degree;
    let mut prev = g_value(disk, f, &cfg.with_degree(d), z)?;
    loop {
        if d + 2 > degree_cap {
            return Ok((prev, d, false));
        }
        let next = g_value(disk, f, &cfg.with_degree(d + 2), z)?;
        if math::abs(next - prev) < DEGREE_SWEEP_TOL {
            return Ok((next, d + 2, true));
        }
        prev = next;
        d += 2;
    }
}

/// Sampled `G_{q,r}(f)` field over a centers grid.
#[derive(Clone)]
pub struct GField {
    pub centers: Vec<Complex64>,
    pub values: Vec<f64>,
    pub q: f64,
    pub r: f64,
    pub degree: usize,
    pub spacing: f64,
    pub extent: f64,
}

/// Build the G-field on the spacing-1/2 lattice over the extent disk.
pub fn g_field(
    disk: &DiskRule,
    f: &Symbol,
    cfg: &LocalApproxConfig,
    extent: f64,
) -> Result<GField> {
    let lat = make_lattice(SEMINORM_SPACING, extent)?;
    let mut centers = Vec::new();
    let mut values = Vec::new();
    for &a in &lat.points {
        if a.norm() <= extent {
            centers.push(a);
            values.push(g_value(disk, f, cfg, a)?);
        }
    }
    Ok(GField {
        centers,
        values,
        q: cfg.q,
        r: cfg.r,
        degree: cfg.degree,
        spacing: SEMINORM_SPACING,
        extent,
    })
}

/// L^s seminorm of a G-field with its tail diagnostic.
#[derive(Clone, Copy, Debug)]
pub struct Seminorm {
    pub value: f64,
    /// `f64::INFINITY` encodes the sup norm.
    pub s: f64,
    /// Outer-band share of the L^s mass (finite s only).
    pub tail_share: f64,
    /// Set when the tail share exceeds 1%: "extent insufficient".
    pub tail_flagged: bool,
}

pub fn seminorm_ida(field: &GField, s: f64) -> Result<Seminorm> {
    if !(s > 0.0) {
        return Err(invalid("seminorm exponent must satisfy 0 < s <= infinity"));
    }
    if s.is_infinite() {
        let value = field.values.iter().cloned().fold(0.0f64, f64::max);
        return Ok(Seminorm {
            value,
            s,
            tail_share: 0.0,
            tail_flagged: false,
        });
    }
    let cell = field.spacing * field.spacing;
    let band = field.extent - 2.0 * field.spacing;
    let total = sum::pairwise_f64_iter(field.values.len(), |i| {
        math::powf(field.values[i], s) * cell
    });
    let tail = sum::pairwise_f64_iter(field.values.len(), |i| {
        if field.centers[i].norm() > band {
            math::powf(field.values[i], s) * cell
        } else {
            0.0
        }
    });
    let tail_share = if total > 0.0 { tail / total } else { 0.0 };
    Ok(Seminorm {
        value: math::powf(total, 1.0 / s),
        s,
        tail_share,
        tail_flagged: tail_share >= 0.01,
    })
}

/// Ring-maxima decay table.
#[derive(Clone, Debug)]
pub struct DecayTable {
    pub radii: Vec<f64>,
    pub maxima: Vec<f64>,
    /// Last-ring max < 0.2 x first-ring max.
    pub decaying: bool,
}

fn ring_table(
    disk: &DiskRule,
    f: &Symbol,
    cfg: &LocalApproxConfig,
    radii: &[f64],
    angles: usize,
) -> Result<DecayTable> {
    let mut maxima = Vec::with_capacity(radii.len());
    for &rad in radii {
        let mut hi = 0.0f64;
        for i in 0..angles {
            let th = 2.0 * core::f64::consts::PI * i as f64 / angles as f64;
            let z = rad * Complex64::new(math::cos(th), math::sin(th));
            hi = hi.max(g_value(disk, f, cfg, z)?);
        }
        maxima.push(hi);
    }
    let decaying = match (maxima.first(), maxima.last()) {
        (Some(&first), Some(&last)) if first > 0.0 => last < 0.2 * first,
        (Some(&first), Some(&last)) => last <= first,
        _ => false,
    };
    Ok(DecayTable {
        radii: radii.to_vec(),
        maxima,
        decaying,
    })
}

#[derive(Clone, Debug)]
pub struct VdaProbe {
    pub at_r: DecayTable,
    pub at_half_r: DecayTable,
    /// Verdicts at the two radii agree (the r-independence instance).
    pub verdicts_agree: bool,
}

/// Vanishing-at-infinity probe: ring maxima of G at radius `r` and `r/2`.
pub fn vda_probe(
    disk: &DiskRule,
    f: &Symbol,
    q: f64,
    r: f64,
    ring_radii: &[f64],
) -> Result<VdaProbe> {
    if ring_radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("ring radii must be strictly increasing"));
    }
    let cfg = LocalApproxConfig::new(q, r)?;
    let at_r = ring_table(disk, f, &cfg, ring_radii, 16)?;
    let cfg_half = cfg.with_radius(r / 2.0);
    let at_half_r = ring_table(disk, f, &cfg_half, ring_radii, 16)?;
    let verdicts_agree = at_r.decaying == at_half_r.decaying;
    Ok(VdaProbe {
        at_r,
        at_half_r,
        verdicts_agree,
    })
}

/// Which local solve backs the decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecompRoute {
    /// `h_j` = best holomorphic fit (any q > 0).
    BestFit,
    /// `h_j` = truncated local orthogonal projection (q >= 1).
    Projection,
}

/// Certificate ratios of the decomposition against `G_{q,2t}(f)` on the probe
/// grid.
#[derive(Clone, Copy, Debug)]
pub struct Certificates {
    pub sup_dbar_f1: f64,
    pub sup_mean_dbar_f1: f64,
    pub sup_mean_f2: f64,
    pub ratio_dbar_f1: f64,
    pub ratio_mean_dbar_f1: f64,
    pub ratio_mean_f2: f64,
    /// Largest of the three ratios (the recorded decomposition constant).
    pub c_dec: f64,
    pub probes: usize,
    /// Probes skipped because `G_{q,2t}` vanished (trivial 0/0 points).
    pub skipped: usize,
}

/// `f = f1 + f2` with `f1 = sum_j h_j psi_j` over a `t/2` lattice.
pub struct Decomposition {
    pub pou: PartitionOfUnity,
    pub fits: Vec<LocalFit>,
    pub f: Symbol,
    pub q: f64,
    /// Lattice scale `t`.
    pub scale: f64,
    pub route: DecompRoute,
    pub certificates: Certificates,
    /// True when any local solve carried a non-convergence flag.
    pub flagged_fits: bool,
}

impl Decomposition {
    pub fn f1(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in self.pou.active(z) {
            let psi = self.pou.eval(j, z);
            if psi > 0.0 {
                acc += self.fits[j].eval(z) * psi;
            }
        }
        acc
    }

    pub fn f2(&self, z: Complex64) -> Complex64 {
        self.f.eval(z) - self.f1(z)
    }

    /// `dbar f1 = sum_j h_j dbar psi_j` (each `h_j` is holomorphic).
    pub fn dbar_f1(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in self.pou.active(z) {
            acc += self.fits[j].eval(z) * self.pou.eval_dbar(j, z);
        }
        acc
    }

    /// `dbar conj(f1) = sum_j conj(h_j) dbar psi_j + psi_j conj(h_j')`.
    pub fn dbar_f1_conj(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in self.pou.active(z) {
            let h = self.fits[j].eval(z).conj();
            let dh = self.fits[j].eval_d_z(z).conj();
            acc += h * self.pou.eval_dbar(j, z) + self.pou.eval(j, z) * dh;
        }
        acc
    }

    /// `d/dz f1 = sum_j h_j d psi_j + psi_j h_j'` (psi real, so
    /// `d psi = conj(dbar psi)`).
    pub fn d_z_f1(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in self.pou.active(z) {
            let h = self.fits[j].eval(z);
            let dh = self.fits[j].eval_d_z(z);
            acc += h * self.pou.eval_dbar(j, z).conj() + self.pou.eval(j, z) * dh;
        }
        acc
    }
}

/// Build the decomposition at scale `t` and certify it on the probe grid over
/// the extent disk.
pub fn decompose(
    disk: &DiskRule,
    f: &Symbol,
    q: f64,
    t: f64,
    probe_extent: f64,
    degree: usize,
    route: DecompRoute,
) -> Result<Decomposition> {
    if !(t > 0.0) || !(probe_extent > 0.0) {
        return Err(invalid("decompose requires t > 0 and a positive extent"));
    }
    if route == DecompRoute::Projection && q < 1.0 {
        return Err(invalid("projection decomposition requires q >= 1"));
    }
    // Lattice margin: fits are evaluated wherever psi_j is active for probes
    // plus the t/2 ball means around them.
    let lat = make_lattice(t / 2.0, probe_extent + 2.5 * t)?;
    let pou = make_partition(lat, t)?;
    let cfg = LocalApproxConfig::new(q, t)?.with_degree(degree);
    let mut fits = Vec::with_capacity(pou.lattice.len());
    let mut flagged = false;
    for &a in &pou.lattice.points {
        let fit = match route {
            DecompRoute::BestFit => local_best_holo(disk, f, &cfg, a)?,
            DecompRoute::Projection => local_projection(disk, f, a, t, degree)?,
        };
        flagged |= !fit.converged;
        fits.push(fit);
    }
    let mut dec = Decomposition {
        pou,
        fits,
        f: f.clone(),
        q,
        scale: t,
        route,
        certificates: Certificates {
            sup_dbar_f1: 0.0,
            sup_mean_dbar_f1: 0.0,
            sup_mean_f2: 0.0,
            ratio_dbar_f1: 0.0,
            ratio_mean_dbar_f1: 0.0,
            ratio_mean_f2: 0.0,
            c_dec: 0.0,
            probes: 0,
            skipped: 0,
        },
        flagged_fits: flagged,
    };
    dec.certificates = certify(disk, &dec, probe_extent, degree)?;
    Ok(dec)
}

fn certify(
    disk: &DiskRule,
    dec: &Decomposition,
    probe_extent: f64,
    degree: usize,
) -> Result<Certificates> {
    let t = dec.scale;
    let q = dec.q;
    let probe_lat = make_lattice((t / 2.0).min(SEMINORM_SPACING * 2.0), probe_extent)?;
    let g_cfg = LocalApproxConfig::new(q, 2.0 * t)?.with_degree(degree);
    // Symbols wrapping the decomposition pieces for the ball means.
    let dbar_sym = {
        let d = DecompShare::new(dec);
        Symbol::new("dbar_f1", move |z| d.0.dbar_f1(z))
    };
    let f2_sym = {
        let d = DecompShare::new(dec);
        Symbol::new("f2", move |z| d.0.f2(z))
    };
    let mut c = Certificates {
        sup_dbar_f1: 0.0,
        sup_mean_dbar_f1: 0.0,
        sup_mean_f2: 0.0,
        ratio_dbar_f1: 0.0,
        ratio_mean_dbar_f1: 0.0,
        ratio_mean_f2: 0.0,
        c_dec: 0.0,
        probes: 0,
        skipped: 0,
    };
    let scale_floor = 1e-12 * (1.0 + mean_m(disk, &dec.f, q, 2.0 * t, Complex64::new(0.0, 0.0))?);
    for &z in &probe_lat.points {
        if z.norm() > probe_extent {
            continue;
        }
        c.probes += 1;
        let dbar_here = dec.dbar_f1(z).norm();
        let mean_dbar = mean_m(disk, &dbar_sym, q, t / 2.0, z)?;
        let mean_f2 = mean_m(disk, &f2_sym, q, t / 2.0, z)?;
        c.sup_dbar_f1 = c.sup_dbar_f1.max(dbar_here);
        c.sup_mean_dbar_f1 = c.sup_mean_dbar_f1.max(mean_dbar);
        c.sup_mean_f2 = c.sup_mean_f2.max(mean_f2);
        let g = g_value(disk, &dec.f, &g_cfg, z)?;
        if g < scale_floor {
            c.skipped += 1;
            continue;
        }
        c.ratio_dbar_f1 = c.ratio_dbar_f1.max(dbar_here / g);
        c.ratio_mean_dbar_f1 = c.ratio_mean_dbar_f1.max(mean_dbar / g);
        c.ratio_mean_f2 = c.ratio_mean_f2.max(mean_f2 / g);
    }
    c.c_dec = c
        .ratio_dbar_f1
        .max(c.ratio_mean_dbar_f1)
        .max(c.ratio_mean_f2);
    Ok(c)
}

// Decomposition evaluators are shared into Symbols for ball means. The
// wrapper keeps an Arc'd snapshot of the fields the evaluators touch.
struct DecompShare(Arc<DecompSnapshot>);

struct DecompSnapshot {
    pou: PartitionOfUnity,
    fits: Vec<LocalFit>,
    f: Symbol,
}

impl DecompSnapshot {
    fn f1(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in self.pou.active(z) {
            let psi = self.pou.eval(j, z);
            if psi > 0.0 {
                acc += self.fits[j].eval(z) * psi;
            }
        }
        acc
    }

    fn f2(&self, z: Complex64) -> Complex64 {
        self.f.eval(z) - self.f1(z)
    }

    fn dbar_f1(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in self.pou.active(z) {
            acc += self.fits[j].eval(z) * self.pou.eval_dbar(j, z);
        }
        acc
    }
}

impl DecompShare {
    fn new(dec: &Decomposition) -> Self {
        DecompShare(Arc::new(DecompSnapshot {
            pou: dec.pou.clone(),
            fits: dec.fits.clone(),
            f: dec.f.clone(),
        }))
    }
}

impl Clone for DecompShare {
    fn clone(&self) -> Self {
        DecompShare(self.0.clone())
    }
}

/// Mean-square oscillation `MO_{2,r}(f)(z)` about the ball average.
pub fn mo(disk: &DiskRule, f: &Symbol, r: f64, z: Complex64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("mo requires r > 0"));
    }
    let avg = ball_average(disk, f, r, z)?;
    let total = disk.integrate_real_checked(z, r, |w| (f.eval(w) - avg).norm_sqr())?;
    Ok(math::sqrt(total / (core::f64::consts::PI * r * r)))
}

/// Pointwise two-sided comparison of `MO_{2,r}` against `G_{2,r}(f) +
/// G_{2,r}(conj f)` over a grid; reports the empirical envelope constants.
#[derive(Clone, Copy, Debug)]
pub struct TwoSidedReport {
    pub c_lower: f64,
    pub c_upper: f64,
    pub points_used: usize,
    pub skipped: usize,
}

pub fn bmo_bda_check(
    disk: &DiskRule,
    f: &Symbol,
    radii: &[f64],
    grid: &[Complex64],
    degree: usize,
) -> Result<TwoSidedReport> {
    let fbar = f.conj();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut used = 0;
    let mut skipped = 0;
    for &r in radii {
        let cfg = LocalApproxConfig::new(2.0, r)?.with_degree(degree);
        for &z in grid {
            let m = mo(disk, f, r, z)?;
            let g = g_value(disk, f, &cfg, z)? + g_value(disk, &fbar, &cfg, z)?;
            if g < 1e-12 {
                skipped += 1;
                continue;
            }
            let ratio = m / g;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            used += 1;
        }
    }
    if used == 0 {
        lo = 0.0;
    }
    Ok(TwoSidedReport {
        c_lower: lo,
        c_upper: hi,
        points_used: used,
        skipped,
    })
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub r: f64,
    pub sup_mo: f64,
    pub sup_g: f64,
}

#[derive(Clone, Debug)]
pub struct SmallScaleScan {
    pub rows: Vec<ScanRow>,
    /// sup MO decays below 0.2x its initial value.
    pub vmo_consistent: bool,
    /// sup G decays below 0.2x its initial value.
    pub vda_star_consistent: bool,
}

/// Scan `sup_z MO_{2,r}` and `sup_z G_{2,r}` down a decreasing r-schedule.
pub fn small_scale_scan(
    disk: &DiskRule,
    f: &Symbol,
    schedule: &[f64],
    grid: &[Complex64],
    degree: usize,
) -> Result<SmallScaleScan> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("schedule must be strictly decreasing"));
    }
    let min_r = *schedule.last().expect("nonempty");
    if min_r < 2.0 * RESOLUTION_GUARD {
        return Err(Error::ResolutionGuard {
            min_r,
            guard: 2.0 * RESOLUTION_GUARD,
        });
    }
    let mut rows = Vec::with_capacity(schedule.len());
    for &r in schedule {
        let cfg = LocalApproxConfig::new(2.0, r)?.with_degree(degree);
        let mut sup_mo = 0.0f64;
        let mut sup_g = 0.0f64;
        for &z in grid {
            sup_mo = sup_mo.max(mo(disk, f, r, z)?);
            sup_g = sup_g.max(g_value(disk, f, &cfg, z)?);
        }
        rows.push(ScanRow { r, sup_mo, sup_g });
    }
    let first = &rows[0];
    let last = rows.last().expect("nonempty");
    // an all-zero scan has already vanished
    let vmo_consistent = first.sup_mo < 1e-12 || last.sup_mo < 0.2 * first.sup_mo;
    let vda_star_consistent = first.sup_g < 1e-12 || last.sup_g < 0.2 * first.sup_g;
    Ok(SmallScaleScan {
        rows,
        vmo_consistent,
        vda_star_consistent,
    })
}

/// A positive measure for averaging functions: a density against Lebesgue
/// measure or a finite atom list.
pub enum Measure {
    Density(Arc<dyn Fn(Complex64) -> f64 + Send + Sync>),
    PointMasses(Vec<(Complex64, f64)>),
}

/// `mu(B(z, r))`.
pub fn averaging_function(disk: &DiskRule, mu: &Measure, r: f64, z: Complex64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("averaging_function requires r > 0"));
    }
    match mu {
        Measure::Density(d) => {
            let v = disk.integrate_real_checked(z, r, |w| {
                let x = d(w);
                debug_assert!(x >= 0.0);
                x
            })?;
            Ok(v)
        }
        Measure::PointMasses(atoms) => {
            let mut total = 0.0;
            for &(p, m) in atoms {
                if m < 0.0 {
                    return Err(invalid("point masses must be nonnegative"));
                }
                if (p - z).norm() < r {
                    total += m;
                }
            }
            Ok(total)
        }
    }
}

#[derive(Clone, Debug)]
pub struct ImoReport {
    pub seminorm_f: Seminorm,
    pub seminorm_conj: Seminorm,
    pub both_finite: bool,
}

/// Seminorms of `f` and `conj(f)` (the simultaneous-boundedness probe).
pub fn imo_check(
    disk: &DiskRule,
    f: &Symbol,
    s: f64,
    q: f64,
    extent: f64,
    degree: usize,
) -> Result<ImoReport> {
    let cfg = LocalApproxConfig::new(q, 1.0)?.with_degree(degree);
    let field_f = g_field(disk, f, &cfg, extent)?;
    let field_c = g_field(disk, &f.conj(), &cfg, extent)?;
    let seminorm_f = seminorm_ida(&field_f, s)?;
    let seminorm_conj = seminorm_ida(&field_c, s)?;
    let both_finite = seminorm_f.value.is_finite() && seminorm_conj.value.is_finite();
    Ok(ImoReport {
        seminorm_f,
        seminorm_conj,
        both_finite,
    })
}
