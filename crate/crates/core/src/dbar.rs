//! Weighted d-bar machinery: the integral solution operator with a Gaussian
//! kernel factor, local disk solves by the Cauchy transform, the
//! principal-value transform realized as a Fourier multiplier, and the
//! conjugate-derivative inequalities built on the symbol decomposition.
//!
//! Normalizations of both solution kernels are fixed by the delta-function
//! calibration (`dbar (1/(pi z)) = delta_0`), not transcribed from any
//! form-language convention: with the kernel written `e^{alpha conj(xi)(z -
//! xi)} S(xi)/(z - xi)`, the constant is `+1/pi`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fft::{freq_index, Fft2};
use crate::ida::{self, DecompRoute};
use crate::math;
use crate::operators::OperatorContext;
use crate::quadrature::DiskRule;
use crate::sum;
use crate::symbol::Symbol;

/// Normalization of the weighted solution kernel, fixed by calibration.
pub const APHI_C0: f64 = 1.0 / core::f64::consts::PI;

/// Minimum points per side of a [`FieldGrid`] (the `h <= L/128` invariant).
pub const MIN_SIDE: usize = 256;

/// Uniform tensor grid of complex samples over `[-L, L]^2`, cell-centered,
/// row-major. Sides are powers of two so the grid can feed the FFT transform
/// after padding.
#[derive(Clone)]
pub struct FieldGrid {
    pub half_extent: f64,
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl FieldGrid {
    pub fn new(half_extent: f64, n: usize) -> Result<Self> {
        if !(half_extent > 0.0) {
            return Err(invalid("field grid needs a positive half extent"));
        }
        if n < MIN_SIDE || !n.is_power_of_two() {
            return Err(Error::GridInvariant {
                what: alloc::format!(
                    "side count {n} must be a power of two with h <= L/128 (n >= {MIN_SIDE})"
                ),
            });
        }
        Ok(FieldGrid {
            half_extent,
            n,
            data: alloc::vec![Complex64::new(0.0, 0.0); n * n],
        })
    }

    pub fn sample(
        half_extent: f64,
        n: usize,
        mut f: impl FnMut(Complex64) -> Complex64,
    ) -> Result<Self> {
        let mut g = Self::new(half_extent, n)?;
        for iy in 0..n {
            for ix in 0..n {
                let z = g.node(ix, iy);
                g.data[iy * n + ix] = f(z);
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn h(&self) -> f64 {
        2.0 * self.half_extent / self.n as f64
    }

    #[inline]
    pub fn node(&self, ix: usize, iy: usize) -> Complex64 {
        let h = self.h();
        Complex64::new(
            -self.half_extent + (ix as f64 + 0.5) * h,
            -self.half_extent + (iy as f64 + 0.5) * h,
        )
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.data[iy * self.n + ix]
    }

    pub fn peak(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max modulus on the outermost cell ring.
    pub fn boundary_max(&self) -> f64 {
        let n = self.n;
        let mut m = 0.0f64;
        for i in 0..n {
            m = m.max(self.at(i, 0).norm());
            m = m.max(self.at(i, n - 1).norm());
            m = m.max(self.at(0, i).norm());
            m = m.max(self.at(n - 1, i).norm());
        }
        m
    }

    /// Grid L^2 norm against `e^{-2 phi}` for the standard weight.
    pub fn weighted_l2(&self, alpha: f64) -> f64 {
        let h2 = self.h() * self.h();
        let total = sum::pairwise_f64_iter(self.data.len(), |i| {
            let z = self.node(i % self.n, i / self.n);
            self.data[i].norm_sqr() * math::exp(-alpha * z.norm_sqr()) * h2
        });
        math::sqrt(total)
    }

    /// Plain grid L^s norm.
    pub fn lebesgue_norm(&self, s: f64) -> f64 {
        let h2 = self.h() * self.h();
        let total = sum::pairwise_f64_iter(self.data.len(), |i| {
            math::powf(self.data[i].norm(), s) * h2
        });
        math::powf(total, 1.0 / s)
    }
}

/// Central-difference `d/dzbar` of a grid (interior cells only).
pub fn dbar_fd(u: &FieldGrid) -> FieldGrid {
    let n = u.n;
    let h = u.h();
    let mut out = FieldGrid {
        half_extent: u.half_extent,
        n,
        data: alloc::vec![Complex64::new(0.0, 0.0); n * n],
    };
    for iy in 1..n - 1 {
        for ix in 1..n - 1 {
            let ux = (u.at(ix + 1, iy) - u.at(ix - 1, iy)) / (2.0 * h);
            let uy = (u.at(ix, iy + 1) - u.at(ix, iy - 1)) / (2.0 * h);
            out.data[iy * n + ix] = 0.5 * (ux + Complex64::new(0.0, 1.0) * uy);
        }
    }
    out
}

// Shared machinery of the weighted solver: the patch stencil (fractional cell
// weights against the exclusion disk of radius 2h) and the first-order patch
// value.
fn patch_fraction_outside(cell_center: Complex64, target: Complex64, h: f64, delta: f64) -> f64 {
    let sub = 8;
    let mut outside = 0usize;
    for sy in 0..sub {
        for sx in 0..sub {
            let p = cell_center
                + Complex64::new(
                    ((sx as f64 + 0.5) / sub as f64 - 0.5) * h,
                    ((sy as f64 + 0.5) / sub as f64 - 0.5) * h,
                );
            if (p - target).norm() > delta {
                outside += 1;
            }
        }
    }
    outside as f64 / (sub * sub) as f64
}

/// Apply the weighted solution operator to sampled data on its own grid.
///
/// `u(z) = c0 [ sum_cells e^{alpha conj(xi) z} W(xi) h^2 / (z - xi)
///            + pi (2h)^2 (alpha conj(z) S(z) - dS(z)) ]`,
/// `W = S e^{-alpha |xi|^2}`, cells within `2h` of the target excluded with
/// fractional boundary weights. `dS` is taken by central differences.
pub fn solve_aphi(s: &FieldGrid, alpha: f64) -> Result<FieldGrid> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha must be > 0"));
    }
    let peak = s.peak();
    let boundary = s.boundary_max();
    if peak > 0.0 && boundary > 1e-8 * peak {
        return Err(Error::BoundaryDecay {
            boundary_max: boundary / peak,
            limit: 1e-8,
        });
    }
    let n = s.n;
    let h = s.h();
    let h2 = h * h;
    let delta = 2.0 * h;

    // Weighted source times cell area.
    let mut w = alloc::vec![Complex64::new(0.0, 0.0); n * n];
    for iy in 0..n {
        for ix in 0..n {
            let xi = s.node(ix, iy);
            w[iy * n + ix] = s.at(ix, iy) * (math::exp(-alpha * xi.norm_sqr()) * h2);
        }
    }

    // Reciprocal table over integer offsets: z - xi = h (dp + i dq).
    let span = 2 * n - 1;
    let mut recip = alloc::vec![Complex64::new(0.0, 0.0); span * span];
    for dq in 0..span {
        for dp in 0..span {
            let re = dp as f64 - (n as f64 - 1.0);
            let im = dq as f64 - (n as f64 - 1.0);
            if re != 0.0 || im != 0.0 {
                recip[dq * span + dp] = 1.0 / (h * Complex64::new(re, im));
            }
        }
    }

    // Stencil of fractional weights near the exclusion disk (targets sit on
    // the same grid, so the geometry is shared by every target).
    let reach = 3i64;
    let mut stencil = Vec::new();
    for dq in -reach..=reach {
        for dp in -reach..=reach {
            let center = Complex64::new(dp as f64 * h, dq as f64 * h);
            let frac = if center.norm() > delta + h {
                1.0
            } else {
                patch_fraction_outside(center, Complex64::new(0.0, 0.0), h, delta)
            };
            if frac < 1.0 {
                stencil.push((dp, dq, frac));
            }
        }
    }

    let mut out = FieldGrid::new(s.half_extent, n)?;
    let mut xpow = alloc::vec![Complex64::new(0.0, 0.0); n];
    let mut ypow = alloc::vec![Complex64::new(0.0, 0.0); n];
    for iy0 in 0..n {
        for ix0 in 0..n {
            let z = s.node(ix0, iy0);
            // e^{alpha conj(xi) z} = C X^p Y^q over cell indices (p, q).
            let xi0 = s.node(0, 0);
            let xr = (alpha * h * z).exp();
            let yr = (Complex64::new(0.0, -alpha * h) * z).exp();
            let mut acc_x = Complex64::new(1.0, 0.0);
            for item in xpow.iter_mut() {
                *item = acc_x;
                acc_x *= xr;
            }
            let mut acc_y = Complex64::new(1.0, 0.0);
            for item in ypow.iter_mut() {
                *item = acc_y;
                acc_y *= yr;
            }
            let c_z = (alpha * xi0.conj() * z).exp();

            let mut total = Complex64::new(0.0, 0.0);
            for q in 0..n {
                let yq = ypow[q];
                let wrow = &w[q * n..(q + 1) * n];
                let roff = (iy0 + n - 1 - q) * span + (ix0 + n - 1);
                let mut row_acc = Complex64::new(0.0, 0.0);
                for p in 0..n {
                    row_acc += xpow[p] * wrow[p] * recip[roff - p];
                }
                total += yq * row_acc;
            }
            // fractional exclusion near the singularity
            for &(dp, dq, frac) in &stencil {
                let p = ix0 as i64 + dp;
                let q = iy0 as i64 + dq;
                if p < 0 || q < 0 || p >= n as i64 || q >= n as i64 {
                    continue;
                }
                let (p, q) = (p as usize, q as usize);
                if p == ix0 && q == iy0 {
                    continue; // recip is zero there anyway
                }
                let term = ypow[q]
                    * xpow[p]
                    * w[q * n + p]
                    * recip[(iy0 + n - 1 - q) * span + (ix0 + n - 1 - p)];
                total -= term * (1.0 - frac);
            }
            let mut u = c_z * total;
            // analytic first-order patch over |v| <= 2h
            let interior = ix0 >= 1 && iy0 >= 1 && ix0 + 1 < n && iy0 + 1 < n;
            if interior {
                let ds = 0.5
                    * ((s.at(ix0 + 1, iy0) - s.at(ix0 - 1, iy0)) / (2.0 * h)
                        - Complex64::new(0.0, 1.0) * (s.at(ix0, iy0 + 1) - s.at(ix0, iy0 - 1))
                            / (2.0 * h));
                let sz = s.at(ix0, iy0);
                u += core::f64::consts::PI
                    * delta
                    * delta
                    * (alpha * z.conj() * sz - ds);
            }
            out.data[iy0 * n + ix0] = u * APHI_C0;
        }
    }
    Ok(out)
}

/// Relative interior L^2 residual `||dbar u - S|| / ||S||` with a cell margin.
pub fn dbar_residual(u: &FieldGrid, s: &FieldGrid, margin: usize) -> f64 {
    let n = u.n;
    let du = dbar_fd(u);
    let mut num = 0.0;
    let mut den = 0.0;
    for iy in margin..n - margin {
        for ix in margin..n - margin {
            num += (du.at(ix, iy) - s.at(ix, iy)).norm_sqr();
            den += s.at(ix, iy).norm_sqr();
        }
    }
    if den == 0.0 {
        return math::sqrt(num);
    }
    math::sqrt(num / den)
}

/// Evaluate the weighted solution operator at arbitrary targets from a
/// closure source (used for the Hankel factorization route, where the source
/// is a basis function times a d-bar derivative). The source grid is internal;
/// its extent must cover the decay of `S e^{-alpha |xi|^2}`.
pub fn aphi_apply(
    source: impl Fn(Complex64) -> Complex64,
    targets: &[Complex64],
    alpha: f64,
    source_half_extent: f64,
    source_n: usize,
) -> Result<Vec<Complex64>> {
    let n = source_n;
    let l = source_half_extent;
    let h = 2.0 * l / n as f64;
    let h2 = h * h;
    let delta = 2.0 * h;
    let node = |p: usize, q: usize| {
        Complex64::new(-l + (p as f64 + 0.5) * h, -l + (q as f64 + 0.5) * h)
    };
    // weighted source
    let mut w = alloc::vec![Complex64::new(0.0, 0.0); n * n];
    let mut peak = 0.0f64;
    let mut boundary = 0.0f64;
    for q in 0..n {
        for p in 0..n {
            let xi = node(p, q);
            let v = source(xi) * math::exp(-alpha * xi.norm_sqr());
            let m = v.norm();
            peak = peak.max(m);
            if p == 0 || q == 0 || p == n - 1 || q == n - 1 {
                boundary = boundary.max(m);
            }
            w[q * n + p] = v * h2;
        }
    }
    if peak > 0.0 && boundary > 1e-8 * peak {
        return Err(Error::BoundaryDecay {
            boundary_max: boundary / peak,
            limit: 1e-8,
        });
    }

    let fd = 1e-5;
    let mut out = Vec::with_capacity(targets.len());
    let mut xpow = alloc::vec![Complex64::new(0.0, 0.0); n];
    let mut ypow = alloc::vec![Complex64::new(0.0, 0.0); n];
    for &z in targets {
        let xi0 = node(0, 0);
        let xr = (alpha * h * z).exp();
        let yr = (Complex64::new(0.0, -alpha * h) * z).exp();
        let mut acc = Complex64::new(1.0, 0.0);
        for item in xpow.iter_mut() {
            *item = acc;
            acc *= xr;
        }
        acc = Complex64::new(1.0, 0.0);
        for item in ypow.iter_mut() {
            *item = acc;
            acc *= yr;
        }
        let c_z = (alpha * xi0.conj() * z).exp();

        // nearest cell indices of the target
        let fx = (z.re + l) / h - 0.5;
        let fy = (z.im + l) / h - 0.5;
        let ix0 = math::round(fx) as i64;
        let iy0 = math::round(fy) as i64;

        let mut total = Complex64::new(0.0, 0.0);
        for q in 0..n {
            let yq = ypow[q];
            let wrow = &w[q * n..(q + 1) * n];
            let mut row_acc = Complex64::new(0.0, 0.0);
            // skip the singular window; handled by the stencil below
            let near_row = (q as i64 - iy0).abs() <= 3;
            if !near_row {
                for p in 0..n {
                    row_acc += xpow[p] * wrow[p] / (z - node(p, q));
                }
            } else {
                for p in 0..n {
                    if (p as i64 - ix0).abs() <= 3 {
                        continue;
                    }
                    row_acc += xpow[p] * wrow[p] / (z - node(p, q));
                }
            }
            total += yq * row_acc;
        }
        // fractional re-inclusion of the 7x7 window outside the patch disk
        for dq in -3i64..=3 {
            for dp in -3i64..=3 {
                let p = ix0 + dp;
                let q = iy0 + dq;
                if p < 0 || q < 0 || p >= n as i64 || q >= n as i64 {
                    continue;
                }
                let (pu, qu) = (p as usize, q as usize);
                let xi = node(pu, qu);
                if (xi - z).norm() < 1e-12 {
                    continue;
                }
                let frac = patch_fraction_outside(xi, z, h, delta);
                if frac > 0.0 {
                    total += ypow[qu] * xpow[pu] * w[qu * n + pu] / (z - xi) * frac;
                }
            }
        }
        let mut u = c_z * total;
        // analytic patch with finite-difference dS at the target
        let sz = source(z);
        let sx = (source(z + Complex64::new(fd, 0.0)) - source(z - Complex64::new(fd, 0.0)))
            / (2.0 * fd);
        let sy = (source(z + Complex64::new(0.0, fd)) - source(z - Complex64::new(0.0, fd)))
            / (2.0 * fd);
        let ds = 0.5 * (sx - Complex64::new(0.0, 1.0) * sy);
        u += core::f64::consts::PI * delta * delta * (alpha * z.conj() * sz - ds);
        out.push(u * APHI_C0);
    }
    Ok(out)
}

/// Both routes to `H_f g` for `g` in the basis span: the solution-operator
/// route `A(g dbar f) - P(A(g dbar f))` and the direct route `fg - P(fg)`.
#[derive(Clone, Debug)]
pub struct HankelRouteComparison {
    pub dbar_route_norm: f64,
    pub direct_norm: f64,
    /// `||route1 - route2|| / ||direct||` in the weighted norm.
    pub relative_gap: f64,
}

pub fn hankel_via_dbar(
    ctx: &OperatorContext,
    f: &Symbol,
    g_coeffs: &[Complex64],
) -> Result<HankelRouteComparison> {
    if !f.has_derivatives() {
        return Err(Error::MissingDerivative {
            symbol: f.name.clone(),
        });
    }
    let alpha = ctx.basis.alpha;
    let basis = ctx.basis.clone();
    let coeffs = g_coeffs.to_vec();
    let g = move |z: Complex64| basis.eval_combination(&coeffs, z);
    let fd = f.clone();
    let source = move |z: Complex64| g(z) * fd.d_zbar(z).expect("checked derivatives");
    // source grid extent: where |g| e^{-alpha |xi|^2} has died off
    let l_s = math::sqrt((ctx.basis.degree as f64 + 1.0) / alpha) + 4.0 / math::sqrt(alpha);
    let u_vals = aphi_apply(&source, &ctx.rule.nodes, alpha, l_s, 256)?;

    // dbar route: u - P u, sampled on the quadrature nodes
    let scaled: Vec<Complex64> = (0..ctx.rule.len())
        .map(|i| {
            let z = ctx.rule.nodes[i];
            u_vals[i] * math::exp(-ctx.weight.eval(z)) * math::sqrt(ctx.rule.weights[i])
        })
        .collect();
    let cu = ctx.mat.coeffs(&scaled);
    let route1: Vec<Complex64> = (0..ctx.rule.len())
        .map(|i| u_vals[i] - ctx.basis.eval_combination(&cu, ctx.rule.nodes[i]))
        .collect();

    // direct route: fg - P(fg)
    let basis2 = ctx.basis.clone();
    let coeffs2 = g_coeffs.to_vec();
    let fg = |z: Complex64| f.eval(z) * basis2.eval_combination(&coeffs2, z);
    let scaled_fg: Vec<Complex64> = (0..ctx.rule.len())
        .map(|i| {
            let z = ctx.rule.nodes[i];
            fg(z) * math::exp(-ctx.weight.eval(z)) * math::sqrt(ctx.rule.weights[i])
        })
        .collect();
    let cfg = ctx.mat.coeffs(&scaled_fg);
    let route2: Vec<Complex64> = (0..ctx.rule.len())
        .map(|i| fg(ctx.rule.nodes[i]) - ctx.basis.eval_combination(&cfg, ctx.rule.nodes[i]))
        .collect();

    let wnorm = |vals: &[Complex64]| {
        math::sqrt(sum::pairwise_f64_iter(vals.len(), |i| {
            let z = ctx.rule.nodes[i];
            vals[i].norm_sqr() * math::exp(-2.0 * ctx.weight.eval(z)) * ctx.rule.weights[i]
        }))
    };
    let n1 = wnorm(&route1);
    let n2 = wnorm(&route2);
    let gap = math::sqrt(sum::pairwise_f64_iter(route1.len(), |i| {
        let z = ctx.rule.nodes[i];
        (route1[i] - route2[i]).norm_sqr() * math::exp(-2.0 * ctx.weight.eval(z)) * ctx.rule.weights[i]
    }));
    Ok(HankelRouteComparison {
        dbar_route_norm: n1,
        direct_norm: n2,
        relative_gap: if n2 > 0.0 { gap / n2 } else { gap },
    })
}

/// Local solution of `dbar u = S` on a disk by the plain Cauchy transform
/// over in-disk sources.
pub struct LocalDbarSolution {
    pub center: Complex64,
    pub radius: f64,
    h: f64,
    src: Vec<(Complex64, Complex64)>,
    s_at: alloc::sync::Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
}

pub fn local_dbar_solve(
    s_fn: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    center: Complex64,
    radius: f64,
    n_side: usize,
) -> Result<LocalDbarSolution> {
    if !(radius > 0.0) || n_side < 16 {
        return Err(invalid("local solve needs radius > 0 and at least 16 cells per side"));
    }
    let h = 2.0 * radius / n_side as f64;
    let mut src = Vec::new();
    for q in 0..n_side {
        for p in 0..n_side {
            let xi = center
                + Complex64::new(
                    -radius + (p as f64 + 0.5) * h,
                    -radius + (q as f64 + 0.5) * h,
                );
            if (xi - center).norm() <= radius {
                let v = s_fn(xi);
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::NonFiniteSample { index: q * n_side + p, at: xi });
                }
                src.push((xi, v * (h * h)));
            }
        }
    }
    Ok(LocalDbarSolution {
        center,
        radius,
        h,
        src,
        s_at: alloc::sync::Arc::new(s_fn),
    })
}

impl LocalDbarSolution {
    /// `u(w) = (1/pi) sum_{|xi - w| > 2h} S(xi) h^2 / (w - xi) - (2h)^2 dS(w)`.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let delta = 2.0 * self.h;
        let total = sum::pairwise_c64_iter(self.src.len(), |i| {
            let (xi, sv) = self.src[i];
            if (xi - w).norm() <= delta {
                Complex64::new(0.0, 0.0)
            } else {
                sv / (w - xi)
            }
        });
        let mut u = total * APHI_C0;
        if (w - self.center).norm() < self.radius - 2.0 * delta {
            let fd = 1e-5;
            let sx = ((self.s_at)(w + Complex64::new(fd, 0.0))
                - (self.s_at)(w - Complex64::new(fd, 0.0)))
                / (2.0 * fd);
            let sy = ((self.s_at)(w + Complex64::new(0.0, fd))
                - (self.s_at)(w - Complex64::new(0.0, fd)))
                / (2.0 * fd);
            let ds = 0.5 * (sx - Complex64::new(0.0, 1.0) * sy);
            u -= delta * delta * ds;
        }
        u
    }

    /// Relative interior residual of `dbar u = S` by finite differences on a
    /// probe mesh strictly inside the disk.
    pub fn interior_residual(&self, n_probe: usize) -> f64 {
        let fd = 2.0 * self.h;
        let rin = self.radius * 0.6;
        let mut num = 0.0;
        let mut den = 0.0;
        for q in 0..n_probe {
            for p in 0..n_probe {
                let w = self.center
                    + Complex64::new(
                        -rin + (p as f64 + 0.5) * 2.0 * rin / n_probe as f64,
                        -rin + (q as f64 + 0.5) * 2.0 * rin / n_probe as f64,
                    );
                if (w - self.center).norm() > rin {
                    continue;
                }
                let ux = (self.eval(w + Complex64::new(fd, 0.0))
                    - self.eval(w - Complex64::new(fd, 0.0)))
                    / (2.0 * fd);
                let uy = (self.eval(w + Complex64::new(0.0, fd))
                    - self.eval(w - Complex64::new(0.0, fd)))
                    / (2.0 * fd);
                let dbar_u = 0.5 * (ux + Complex64::new(0.0, 1.0) * uy);
                num += (dbar_u - (self.s_at)(w)).norm_sqr();
                den += (self.s_at)(w).norm_sqr();
            }
        }
        if den == 0.0 {
            math::sqrt(num)
        } else {
            math::sqrt(num / den)
        }
    }

    /// `||u||_{L^q(B)} / ||S||_{L^q(B)}` on the disk rule.
    pub fn lq_ratio(&self, disk: &DiskRule, q: f64) -> Result<f64> {
        let nu = disk.integrate_real_checked(self.center, self.radius, |w| {
            math::powf(self.eval(w).norm(), q)
        })?;
        let ns = disk.integrate_real_checked(self.center, self.radius, |w| {
            math::powf((self.s_at)(w).norm(), q)
        })?;
        if ns == 0.0 {
            return Ok(0.0);
        }
        Ok(math::powf(nu / ns, 1.0 / q))
    }
}

/// Principal-value transform as the Fourier multiplier `conj(kappa)/kappa`
/// on the zero-padded grid (padding 100% >= the 25% invariant); DC is zeroed.
pub fn beurling(s: &FieldGrid) -> Result<FieldGrid> {
    let peak = s.peak();
    let boundary = s.boundary_max();
    if peak > 0.0 && boundary > 1e-6 * peak {
        return Err(Error::GridInvariant {
            what: alloc::format!(
                "padding violation: data at the boundary is {:.3e} of peak; periodization \
                 needs decay below 1e-6",
                boundary / peak
            ),
        });
    }
    let n = s.n;
    let big = 2 * n;
    let plan = Fft2::new(big)?;
    let mut buf = alloc::vec![Complex64::new(0.0, 0.0); big * big];
    for iy in 0..n {
        for ix in 0..n {
            buf[(iy + n / 2) * big + (ix + n / 2)] = s.at(ix, iy);
        }
    }
    plan.forward(&mut buf);
    let dk = core::f64::consts::PI / s.half_extent / 2.0; // 2 pi / (big * h)
    for ky in 0..big {
        for kx in 0..big {
            let k = Complex64::new(
                dk * freq_index(kx, big) as f64 * 2.0,
                dk * freq_index(ky, big) as f64 * 2.0,
            );
            let m = if k.norm_sqr() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                k.conj() / k
            };
            buf[ky * big + kx] *= m;
        }
    }
    plan.inverse(&mut buf);
    let mut out = FieldGrid::new(s.half_extent, n)?;
    for iy in 0..n {
        for ix in 0..n {
            out.data[iy * n + ix] = buf[(iy + n / 2) * big + (ix + n / 2)];
        }
    }
    Ok(out)
}

/// Relative L^2 error of the intertwining identity `d f = T(dbar f)` for a
/// symbol with closed-form derivatives, on an `n x n` grid over `[-L, L]^2`.
pub fn beurling_identity_error(f: &Symbol, half_extent: f64, n: usize) -> Result<f64> {
    let dbar = FieldGrid::sample(half_extent, n, |z| f.d_zbar(z).expect("derivative"))?;
    let dz = FieldGrid::sample(half_extent, n, |z| f.d_z(z).expect("derivative"))?;
    if !f.has_derivatives() {
        return Err(Error::MissingDerivative {
            symbol: f.name.clone(),
        });
    }
    let t = beurling(&dbar)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in t.data.iter().zip(dz.data.iter()) {
        num += (a - b).norm_sqr();
        den += b.norm_sqr();
    }
    Ok(math::sqrt(num / den.max(1e-300)))
}

/// Grid ratio `||d f / d z||_{L^s} / ||d f / d zbar||_{L^s}`, the recorded
/// constant of the conjugate-derivative inequality. Requires `1 < s < inf`.
pub fn conjugate_gradient_bound_check(
    f: &Symbol,
    s: f64,
    half_extent: f64,
    n: usize,
) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(invalid("conjugate-derivative ratio needs 1 < s < infinity"));
    }
    let dz = FieldGrid::sample(half_extent, n, |z| f.d_z(z).expect("derivative"))?;
    let dzb = FieldGrid::sample(half_extent, n, |z| f.d_zbar(z).expect("derivative"))?;
    if !f.has_derivatives() {
        return Err(Error::MissingDerivative {
            symbol: f.name.clone(),
        });
    }
    let num = dz.lebesgue_norm(s);
    let den = dzb.lebesgue_norm(s);
    if den < 1e-10 {
        if num > 1e-10 {
            return Err(Error::InvariantViolation {
                what: alloc::format!(
                    "'{}' has vanishing dbar-derivative mass but d-derivative {num:.3e}",
                    f.name
                ),
            });
        }
        return Ok(1.0);
    }
    Ok(num / den)
}

#[derive(Clone, Debug)]
pub struct ConjDecompRow {
    pub scale: f64,
    pub sup_dbar_conj_f1: f64,
    /// `R sup|dbar conj(f_1)| / ||f||_inf`.
    pub scaled: f64,
}

#[derive(Clone, Debug)]
pub struct ConjDecompReport {
    pub rows: Vec<ConjDecompRow>,
    /// Scaled products agree within a factor 2 across the schedule.
    pub consistent: bool,
}

/// Builds decompositions at each scale and verifies the `1/R` decay of
/// `sup |dbar conj(f_1)|`.
pub fn conjugate_decomposition_check(
    disk: &DiskRule,
    f: &Symbol,
    q: f64,
    scales: &[f64],
    probe_extent: f64,
    degree: usize,
) -> Result<ConjDecompReport> {
    let sup_f = f.sup_bound().ok_or(Error::UnboundedSymbol {
        symbol: f.name.clone(),
        op: "conjugate_decomposition_check",
    })?;
    let mut rows = Vec::with_capacity(scales.len());
    for &big_r in scales {
        let dec = ida::decompose(disk, f, q, big_r, probe_extent, degree, DecompRoute::BestFit)?;
        let mut sup = 0.0f64;
        let steps = 24;
        for qy in 0..steps {
            for qx in 0..steps {
                let z = Complex64::new(
                    -probe_extent + 2.0 * probe_extent * (qx as f64 + 0.5) / steps as f64,
                    -probe_extent + 2.0 * probe_extent * (qy as f64 + 0.5) / steps as f64,
                );
                if z.norm() <= probe_extent {
                    sup = sup.max(dec.dbar_f1_conj(z).norm());
                }
            }
        }
        rows.push(ConjDecompRow {
            scale: big_r,
            sup_dbar_conj_f1: sup,
            scaled: big_r * sup / sup_f,
        });
    }
    let lo = rows.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.scaled).fold(0.0f64, f64::max);
    Ok(ConjDecompReport {
        rows,
        consistent: hi <= 2.0 * lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::symbol::corpus;

    #[test]
    fn field_grid_enforces_its_invariants() {
        assert!(FieldGrid::new(4.0, 128).is_err());
        assert!(FieldGrid::new(4.0, 300).is_err());
        assert!(FieldGrid::new(-1.0, 256).is_err());
        let g = FieldGrid::new(4.0, 256).unwrap();
        assert!(g.h() <= 4.0 / 128.0 + 1e-15);
    }

    #[test]
    fn solver_rejects_non_decaying_sources() {
        let s = FieldGrid::sample(4.5, 256, |_| c64(1.0, 0.0)).unwrap();
        assert!(matches!(
            solve_aphi(&s, 1.0),
            Err(Error::BoundaryDecay { .. })
        ));
    }

    #[test]
    fn zero_source_solves_to_zero() {
        let s = FieldGrid::new(4.5, 256).unwrap();
        let u = solve_aphi(&s, 1.0).unwrap();
        assert!(u.peak() == 0.0);
    }

    #[test]
    fn calibration_oracle_gaussian() {
        // S = dbar(e^{-|z|^2}) = -z e^{-|z|^2}; the solve must reproduce a
        // function with dbar u = S to 1e-2 relative on the interior.
        let s = FieldGrid::sample(4.8, 256, |z| -z * (-z.norm_sqr()).exp()).unwrap();
        let u = solve_aphi(&s, 1.0).unwrap();
        let res = dbar_residual(&u, &s, 8);
        assert!(res <= 1e-2, "residual {res}");
        // weighted-norm constant is finite and modest
        let c = u.weighted_l2(1.0) / s.weighted_l2(1.0);
        assert!(c.is_finite() && c < 20.0, "C = {c}");
    }

    #[test]
    fn local_solve_recovers_the_conjugate_coordinate() {
        // S = 1 on B(0,1): u = conj(w) + holomorphic; residual small inside.
        let sol = local_dbar_solve(|_| c64(1.0, 0.0), c64(0.0, 0.0), 1.0, 128).unwrap();
        let res = sol.interior_residual(10);
        assert!(res <= 1e-2, "residual {res}");
        // dbar(conj w) = 1, and u - conj(w) should be nearly holomorphic:
        // check u(w) - conj(w) varies holomorphically by sampling dbar
        let sol0 = local_dbar_solve(|_| c64(0.0, 0.0), c64(0.0, 0.0), 1.0, 64).unwrap();
        assert!(sol0.eval(c64(0.2, 0.1)).norm() == 0.0);
    }

    #[test]
    fn local_solve_lq_ratios_are_stable() {
        let disk = DiskRule::default_rule();
        let sol = local_dbar_solve(
            |w| c64(w.re.sin(), 0.0),
            c64(0.5, -0.5),
            1.0,
            128,
        )
        .unwrap();
        let mut ratios = alloc::vec![];
        for q in [1.0, 2.0, 4.0] {
            ratios.push(sol.lq_ratio(&disk, q).unwrap());
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(hi <= 3.0 * lo, "{ratios:?}");
    }

    #[test]
    fn beurling_intertwines_the_derivatives_of_a_gaussian() {
        let gauss = Symbol::new("gauss", |z| Complex64::new((-z.norm_sqr()).exp(), 0.0))
            .with_derivatives(
                |z| -z.conj() * (-z.norm_sqr()).exp(),
                |z| -z * (-z.norm_sqr()).exp(),
            );
        let err = beurling_identity_error(&gauss, 6.0, 512).unwrap();
        assert!(err <= 1e-3, "{err}");
    }

    #[test]
    fn beurling_zero_in_zero_out_and_padding_guard() {
        let zero = FieldGrid::new(4.0, 256).unwrap();
        let out = beurling(&zero).unwrap();
        assert_eq!(out.peak(), 0.0);
        let bad = FieldGrid::sample(4.0, 256, |_| c64(1.0, 0.0)).unwrap();
        assert!(matches!(beurling(&bad), Err(Error::GridInvariant { .. })));
    }

    #[test]
    fn beurling_preserves_energy_of_zero_mean_envelopes() {
        // odd Gaussian-enveloped oscillation: zero mean, decays at the boundary
        let s = FieldGrid::sample(6.0, 256, |z| {
            let env = (-0.5 * z.norm_sqr()).exp();
            let osc = c64((2.0 * z.re).sin() + (1.5 * z.im).cos() - 1.0, (z.re + z.im).sin());
            let v = env * osc;
            v - env * c64((-2.0 * z.re).sin() + (1.5 * z.im).cos() - 1.0, (-z.re - z.im).sin())
        })
        .unwrap();
        let t = beurling(&s).unwrap();
        let e1 = s.lebesgue_norm(2.0);
        let e2 = t.lebesgue_norm(2.0);
        assert!((e1 - e2).abs() <= 2e-3 * e1, "{e1} vs {e2}");
    }

    #[test]
    fn conjugate_ratio_is_one_for_radial_symbols() {
        let gauss = Symbol::new("gauss", |z| Complex64::new((-z.norm_sqr()).exp(), 0.0))
            .with_derivatives(
                |z| -z.conj() * (-z.norm_sqr()).exp(),
                |z| -z * (-z.norm_sqr()).exp(),
            );
        let ratio = conjugate_gradient_bound_check(&gauss, 2.0, 6.0, 256).unwrap();
        assert!((ratio - 1.0).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn conjugate_ratio_matches_the_radial_moment_oracle() {
        // f = z e^{-|z|^2}: both derivative L^2 masses equal pi/4 by the
        // radial moment integrals, so the ratio is 1.
        let f = Symbol::new("zgauss", |z| z * (-z.norm_sqr()).exp()).with_derivatives(
            |z| Complex64::new((1.0 - z.norm_sqr()) * (-z.norm_sqr()).exp(), 0.0),
            |z| -z * z * (-z.norm_sqr()).exp(),
        );
        let ratio = conjugate_gradient_bound_check(&f, 2.0, 6.0, 256).unwrap();
        assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
        // s-sweep stays finite
        for s in [1.5, 4.0] {
            let r = conjugate_gradient_bound_check(&f, s, 6.0, 256).unwrap();
            assert!(r.is_finite() && r > 0.0);
        }
        assert!(conjugate_gradient_bound_check(&f, 1.0, 6.0, 256).is_err());
    }

    #[test]
    fn conjugate_decomposition_products_are_scale_stable() {
        let disk = DiskRule::default_rule();
        let rep = conjugate_decomposition_check(
            &disk,
            &corpus::phase(),
            2.0,
            &[2.0, 4.0],
            3.0,
            4,
        )
        .unwrap();
        assert!(rep.consistent, "{:?}", rep.rows);
        // constants: dbar conj(f1) of a constant symbol vanishes
        let c = Symbol::new("const", |_| c64(0.7, -0.2)).with_bound(0.73);
        let rep_c = conjugate_decomposition_check(&disk, &c, 2.0, &[2.0], 2.0, 2).unwrap();
        assert!(rep_c.rows[0].sup_dbar_conj_f1 < 1e-9, "{:?}", rep_c.rows);
        // real symbols: dbar conj(f1) = conj(d f1) pointwise
        let dec = ida::decompose(&disk, &corpus::sinre(), 2.0, 1.5, 2.0, 4, DecompRoute::BestFit)
            .unwrap();
        for z in [c64(0.3, 0.4), c64(-1.0, 0.8)] {
            let a = dec.dbar_f1_conj(z);
            let b = dec.d_z_f1(z).conj();
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn unbounded_symbols_are_rejected_by_the_conjugate_check() {
        let disk = DiskRule::default_rule();
        assert!(matches!(
            conjugate_decomposition_check(&disk, &corpus::zbar(), 2.0, &[2.0], 2.0, 3),
            Err(Error::UnboundedSymbol { .. })
        ));
    }
}
