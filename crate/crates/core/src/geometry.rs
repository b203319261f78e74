//! Square lattices, covering multiplicity, and smooth partitions of unity
//! subordinate to lattice balls.
//!
//! The partition follows the quotient construction: a plateau profile `rho`
//! (identically 1 inside radius 1/2, supported in radius 3/4) is centered at
//! every point of an `R/2`-spaced lattice and normalized by the local sum, so
//! the members add to 1 exactly and each gradient scales like `1/R`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::math;

/// Square lattice of spacing `r` covering the extent disk (one extra ring of
/// points beyond the extent keeps partition sums exact at the boundary).
#[derive(Clone)]
pub struct Lattice {
    pub spacing: f64,
    pub extent: f64,
    pub points: Vec<Complex64>,
    index: BTreeMap<(i64, i64), usize>,
}

/// `make_lattice`: grid points `r (m + i n)` out to one full grid ring beyond
/// the extent (`max(|m|,|n|) <= floor(extent/r) + 1`), so diagonal neighbors
/// at the boundary are present and partition sums stay exact on the extent
/// disk.
pub fn make_lattice(r: f64, extent: f64) -> Result<Lattice> {
    if !(r > 0.0) || !(extent > 0.0) {
        return Err(invalid("lattice spacing and extent must be > 0"));
    }
    let k_max = math::floor(extent / r + 1e-12) as i64 + 1;
    let mut points = Vec::new();
    let mut index = BTreeMap::new();
    for n in -k_max..=k_max {
        for m in -k_max..=k_max {
            let a = Complex64::new(m as f64 * r, n as f64 * r);
            index.insert((m, n), points.len());
            points.push(a);
        }
    }
    Ok(Lattice {
        spacing: r,
        extent,
        points,
        index,
    })
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of lattice points within `radius` of `z`, in deterministic
    /// (row-major grid) order.
    pub fn near(&self, z: Complex64, radius: f64) -> Vec<usize> {
        let r = self.spacing;
        let m0 = math::floor(z.re / r) as i64;
        let n0 = math::floor(z.im / r) as i64;
        let span = math::ceil(radius / r) as i64 + 1;
        let mut out = Vec::new();
        for n in (n0 - span)..=(n0 + span) {
            for m in (m0 - span)..=(m0 + span) {
                if let Some(&j) = self.index.get(&(m, n)) {
                    if (z - self.points[j]).norm() <= radius {
                        out.push(j);
                    }
                }
            }
        }
        out
    }

    /// Covering count `#{k : |z - a_k| <= radius}` (closed balls; the open
    /// variant would miss boundary grid points and contradict the enumeration
    /// the counts are checked against).
    pub fn covering_count(&self, z: Complex64, radius: f64) -> usize {
        self.near(z, radius).len()
    }
}

/// Plateau profile: 1 on `[0, 1/2]`, 0 from `3/4` on, glued by the
/// `e^{-1/x}` smoothstep in between. Input is a radius (nonnegative).
pub fn bump_profile(x: f64) -> f64 {
    if x <= 0.5 {
        1.0
    } else if x >= 0.75 {
        0.0
    } else {
        smoothstep((0.75 - x) / 0.25)
    }
}

/// d/dx of [`bump_profile`]; closed form, zero outside the glue band.
pub fn bump_profile_deriv(x: f64) -> f64 {
    if x <= 0.5 || x >= 0.75 {
        0.0
    } else {
        -4.0 * smoothstep_deriv((0.75 - x) / 0.25)
    }
}

fn g(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        math::exp(-1.0 / t)
    }
}

fn g_deriv(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        math::exp(-1.0 / t) / (t * t)
    }
}

fn smoothstep(t: f64) -> f64 {
    let a = g(t);
    let b = g(1.0 - t);
    a / (a + b)
}

fn smoothstep_deriv(t: f64) -> f64 {
    let a = g(t);
    let b = g(1.0 - t);
    let da = g_deriv(t);
    let db = -g_deriv(1.0 - t);
    let denom = (a + b) * (a + b);
    (da * (a + b) - a * (da + db)) / denom
}

/// Smooth partition of unity subordinate to the balls `B(a_j, 3R/4)` of an
/// `R/2`-spaced lattice.
#[derive(Clone)]
pub struct PartitionOfUnity {
    pub lattice: Lattice,
    /// Support scale `R`; members vanish outside `B(a_j, 3R/4)`.
    pub support_radius: f64,
}

/// `make_partition`: requires `lat.spacing == R/2` (the pairing of `R`-balls
/// with an `R/2` lattice).
pub fn make_partition(lattice: Lattice, support_radius: f64) -> Result<PartitionOfUnity> {
    let expected = support_radius / 2.0;
    if math::abs(lattice.spacing - expected) > 1e-12 * support_radius.max(1.0) {
        return Err(Error::SpacingMismatch {
            expected,
            got: lattice.spacing,
        });
    }
    Ok(PartitionOfUnity {
        lattice,
        support_radius,
    })
}

impl PartitionOfUnity {
    /// Indices whose members are nonzero at `z`.
    pub fn active(&self, z: Complex64) -> Vec<usize> {
        self.lattice.near(z, 0.75 * self.support_radius)
    }

    fn rho_at(&self, j: usize, z: Complex64) -> f64 {
        bump_profile((z - self.lattice.points[j]).norm() / self.support_radius)
    }

    /// d/dzbar of the j-th unnormalized bump at `z`.
    fn rho_dbar(&self, j: usize, z: Complex64) -> Complex64 {
        let w = z - self.lattice.points[j];
        let d = w.norm();
        if d < 1e-300 {
            return Complex64::new(0.0, 0.0);
        }
        let dr = bump_profile_deriv(d / self.support_radius) / self.support_radius;
        // d|w|/dzbar = w / (2|w|)
        w * (dr / (2.0 * d))
    }

    /// `psi_j(z)`.
    pub fn eval(&self, j: usize, z: Complex64) -> f64 {
        let num = self.rho_at(j, z);
        if num == 0.0 {
            return 0.0;
        }
        let mut den = 0.0;
        for k in self.active(z) {
            den += self.rho_at(k, z);
        }
        num / den
    }

    /// `d psi_j / d zbar` in closed form (quotient rule over the active set).
    pub fn eval_dbar(&self, j: usize, z: Complex64) -> Complex64 {
        let act = self.active(z);
        let mut den = 0.0;
        let mut den_dbar = Complex64::new(0.0, 0.0);
        for &k in &act {
            den += self.rho_at(k, z);
            den_dbar += self.rho_dbar(k, z);
        }
        let num = self.rho_at(j, z);
        let num_dbar = self.rho_dbar(j, z);
        (num_dbar * den - num * den_dbar) / (den * den)
    }

    /// Gradient `(d/dx, d/dy) psi_j` from the Wirtinger derivative of the
    /// real-valued member: `psi_x = 2 Re dbar psi`, `psi_y = 2 Im dbar psi`.
    pub fn eval_gradient(&self, j: usize, z: Complex64) -> (f64, f64) {
        let d = self.eval_dbar(j, z);
        (2.0 * d.re, 2.0 * d.im)
    }

    /// Sum of all members at `z` (1 on the extent disk by construction).
    pub fn sum(&self, z: Complex64) -> f64 {
        let mut s = 0.0;
        for j in self.active(z) {
            s += self.eval(j, z);
        }
        s
    }

    /// `sum_j dbar psi_j(z)`; vanishes identically since the members sum to 1.
    pub fn dbar_sum(&self, z: Complex64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for j in self.active(z) {
            s += self.eval_dbar(j, z);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use proptest::prelude::*;

    fn probes(extent: f64, n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed.max(1);
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        (0..n)
            .map(|_| {
                let rho = extent * next().sqrt();
                let th = 2.0 * core::f64::consts::PI * next();
                c64(rho * th.cos(), rho * th.sin())
            })
            .collect()
    }

    #[test]
    fn lattice_contains_origin_and_neighbors() {
        let lat = make_lattice(1.0, 0.4).unwrap();
        assert!(lat.points.iter().any(|a| a.norm() < 1e-12));
        // origin plus its 8 grid neighbors fit within extent + r
        assert!(lat.len() >= 9, "{}", lat.len());
        for (m, n) in [(1i64, 0i64), (-1, 1), (1, 1), (0, -1)] {
            let p = c64(m as f64, n as f64);
            assert!(lat.points.iter().any(|a| (a - p).norm() < 1e-12));
        }
    }

    #[test]
    fn covering_count_examples() {
        let lat = make_lattice(1.0, 10.0).unwrap();
        assert_eq!(lat.covering_count(c64(0.0, 0.0), 0.5), 1);
        // grid points with |a| <= 2: 13 of them (the 4 boundary points count)
        assert_eq!(lat.covering_count(c64(0.0, 0.0), 2.0), 13);
        // monotone in radius
        let z = c64(0.3, -0.2);
        let mut last = 0;
        for radius in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let c = lat.covering_count(z, radius);
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn multiplicity_of_2r_balls_is_between_1_and_21() {
        let lat = make_lattice(1.0, 10.0).unwrap();
        let mut lo = usize::MAX;
        let mut hi = 0;
        for z in probes(10.0, 10_000, 77) {
            let c = lat.covering_count(z, 2.0);
            lo = lo.min(c);
            hi = hi.max(c);
        }
        assert!(lo >= 1, "covering failed: min {lo}");
        assert!(hi <= 21, "multiplicity too high: {hi}");
    }

    #[test]
    fn closest_pair_distance_is_the_spacing() {
        let lat = make_lattice(0.7, 3.0).unwrap();
        let mut best = f64::INFINITY;
        for (i, a) in lat.points.iter().enumerate() {
            for b in lat.points.iter().skip(i + 1) {
                best = best.min((a - b).norm());
            }
        }
        assert!((best - 0.7).abs() < 1e-12);
    }

    #[test]
    fn profile_plateau_support_and_midpoint() {
        assert_eq!(bump_profile(0.2), 1.0);
        assert_eq!(bump_profile(0.5), 1.0);
        assert_eq!(bump_profile(0.75), 0.0);
        assert_eq!(bump_profile(1.3), 0.0);
        assert!((bump_profile(0.625) - 0.5).abs() < 1e-12);
        // derivative: zero outside the band, negative inside
        assert_eq!(bump_profile_deriv(0.4), 0.0);
        assert!(bump_profile_deriv(0.6) < 0.0);
        // FD agreement
        let h = 1e-6;
        for x in [0.55, 0.625, 0.7] {
            let fd = (bump_profile(x + h) - bump_profile(x - h)) / (2.0 * h);
            assert!((fd - bump_profile_deriv(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn partition_requires_matched_spacing() {
        let lat = make_lattice(1.0, 4.0).unwrap();
        assert!(matches!(
            make_partition(lat, 3.0),
            Err(Error::SpacingMismatch { .. })
        ));
    }

    #[test]
    fn partition_sums_to_one_and_members_are_bounded() {
        let lat = make_lattice(0.5, 4.0).unwrap();
        let pou = make_partition(lat, 1.0).unwrap();
        for z in probes(4.0, 1000, 5) {
            let s = pou.sum(z);
            assert!((s - 1.0).abs() < 1e-12, "sum {s} at {z}");
        }
        for (j, &a) in pou.lattice.points.iter().enumerate() {
            if a.norm() < 3.0 {
                let v = pou.eval(j, a);
                assert!((1.0 / 21.0..=1.0).contains(&v), "psi_j(a_j) = {v}");
            }
        }
    }

    #[test]
    fn member_vanishes_outside_three_quarters_support() {
        let lat = make_lattice(0.5, 4.0).unwrap();
        let pou = make_partition(lat, 1.0).unwrap();
        let j = pou.lattice.near(c64(0.0, 0.0), 0.1)[0];
        assert_eq!(pou.eval(j, c64(0.76, 0.0)), 0.0);
        assert!(pou.eval(j, c64(0.74, 0.0)) >= 0.0);
    }

    #[test]
    fn dbar_sum_vanishes_everywhere() {
        let lat = make_lattice(0.5, 4.0).unwrap();
        let pou = make_partition(lat, 1.0).unwrap();
        for z in probes(3.5, 300, 11) {
            assert!(pou.dbar_sum(z).norm() < 1e-10, "at {z}");
        }
        // including points on a bump boundary
        assert!(pou.dbar_sum(c64(0.75, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let lat = make_lattice(0.5, 3.0).unwrap();
        let pou = make_partition(lat, 1.0).unwrap();
        let j = pou.lattice.near(c64(0.0, 0.0), 0.1)[0];
        let h = 1e-5;
        for z in probes(1.2, 60, 23) {
            let (gx, gy) = pou.eval_gradient(j, z);
            let fdx = (pou.eval(j, z + c64(h, 0.0)) - pou.eval(j, z - c64(h, 0.0))) / (2.0 * h);
            let fdy = (pou.eval(j, z + c64(0.0, h)) - pou.eval(j, z - c64(0.0, h))) / (2.0 * h);
            assert!((gx - fdx).abs() < 1e-4, "at {z}: {gx} vs {fdx}");
            assert!((gy - fdy).abs() < 1e-4);
        }
    }

    #[test]
    fn gradient_scale_is_invariant_in_r() {
        // R sup|grad psi_j| identical across scales (same relative geometry).
        let mut scaled = alloc::vec![];
        for big_r in [1.0f64, 2.0, 4.0] {
            let lat = make_lattice(big_r / 2.0, 3.0 * big_r).unwrap();
            let pou = make_partition(lat, big_r).unwrap();
            let j = pou.lattice.near(c64(0.0, 0.0), 0.1 * big_r)[0];
            let mut sup: f64 = 0.0;
            for v in probes(1.0, 400, 3) {
                let z = v * big_r;
                let (gx, gy) = pou.eval_gradient(j, z);
                sup = sup.max((gx * gx + gy * gy).sqrt());
            }
            scaled.push(big_r * sup);
        }
        for v in &scaled {
            assert!((v - scaled[0]).abs() < 0.05 * scaled[0], "{scaled:?}");
        }
    }

    #[test]
    fn single_member_dbar_is_order_one_over_r() {
        let big_r = 2.0;
        let lat = make_lattice(1.0, 6.0).unwrap();
        let pou = make_partition(lat, big_r).unwrap();
        let mut sup: f64 = 0.0;
        for z in probes(4.0, 500, 9) {
            for j in pou.active(z) {
                sup = sup.max(pou.eval_dbar(j, z).norm());
            }
        }
        assert!(sup > 0.0);
        assert!(sup * big_r < 10.0, "R sup |dbar psi| = {}", sup * big_r);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn cover_and_disjointness_hold_for_random_spacing(
            r in 0.3f64..3.0,
            seed in 1u64..5000,
        ) {
            let extent = 4.0 * r;
            let lat = make_lattice(r, extent).unwrap();
            // cover: every probe lies in at least one r-ball
            for z in probes(extent, 200, seed) {
                prop_assert!(lat.covering_count(z, r) >= 1);
            }
            // half-radius balls disjoint: no two centers closer than 2*(r/2)
            for (i, a) in lat.points.iter().enumerate() {
                for b in lat.points.iter().skip(i + 1) {
                    prop_assert!((a - b).norm() >= r - 1e-9);
                }
            }
        }
    }

    #[test]
    fn multiplicity_bound_is_uniform_in_spacing() {
        let base = probes(1.0, 2000, 41);
        let mut maxima = alloc::vec![];
        for r in [0.5f64, 1.0, 2.0] {
            let lat = make_lattice(r, 6.0 * r).unwrap();
            let mut hi = 0;
            for v in &base {
                hi = hi.max(lat.covering_count(v * (6.0 * r), 2.0 * r));
            }
            maxima.push(hi);
        }
        assert_eq!(maxima[0], maxima[1]);
        assert_eq!(maxima[1], maxima[2]);
    }
}
