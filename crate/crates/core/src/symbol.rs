//! Symbols: complex-valued functions on the plane with optional closed-form
//! Wirtinger derivatives and boundedness metadata, plus the built-in corpus
//! every experiment references by id.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::math;

pub type CFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub struct Symbol {
    pub name: String,
    eval: CFn,
    d_z: Option<CFn>,
    d_zbar: Option<CFn>,
    /// `Some(b)=` certified `|f| <= b` everywhere.
    sup_bound: Option<f64>,
}

impl Symbol {
    pub fn new(name: impl Into<String>, eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        Symbol {
            name: name.into(),
            eval: Arc::new(eval),
            d_z: None,
            d_zbar: None,
            sup_bound: None,
        }
    }

    pub fn with_derivatives(
        mut self,
        d_z: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        d_zbar: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        self.d_z = Some(Arc::new(d_z));
        self.d_zbar = Some(Arc::new(d_zbar));
        self
    }

    pub fn with_bound(mut self, sup: f64) -> Self {
        self.sup_bound = Some(sup);
        self
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn is_bounded(&self) -> bool {
        self.sup_bound.is_some()
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    pub fn has_derivatives(&self) -> bool {
        self.d_z.is_some() && self.d_zbar.is_some()
    }

    pub fn d_z(&self, z: Complex64) -> Result<Complex64> {
        match &self.d_z {
            Some(f) => Ok(f(z)),
            None => Err(Error::MissingDerivative {
                symbol: self.name.clone(),
            }),
        }
    }

    pub fn d_zbar(&self, z: Complex64) -> Result<Complex64> {
        match &self.d_zbar {
            Some(f) => Ok(f(z)),
            None => Err(Error::MissingDerivative {
                symbol: self.name.clone(),
            }),
        }
    }

    /// The conjugated symbol; Wirtinger derivatives swap and conjugate.
    pub fn conj(&self) -> Symbol {
        let eval = self.eval.clone();
        let mut out = Symbol {
            name: alloc::format!("conj({})", self.name),
            eval: Arc::new(move |z| eval(z).conj()),
            d_z: None,
            d_zbar: None,
            sup_bound: self.sup_bound,
        };
        if let (Some(dz), Some(dzb)) = (self.d_z.clone(), self.d_zbar.clone()) {
            out.d_z = Some(Arc::new(move |z| dzb(z).conj()));
            out.d_zbar = Some(Arc::new(move |z| dz(z).conj()));
        }
        out
    }

    /// `z -> f(z + shift)`.
    pub fn translate(&self, shift: Complex64) -> Symbol {
        let eval = self.eval.clone();
        let mut out = Symbol {
            name: alloc::format!("{}.translated", self.name),
            eval: Arc::new(move |z| eval(z + shift)),
            d_z: None,
            d_zbar: None,
            sup_bound: self.sup_bound,
        };
        if let (Some(dz), Some(dzb)) = (self.d_z.clone(), self.d_zbar.clone()) {
            out.d_z = Some(Arc::new(move |z| dz(z + shift)));
            out.d_zbar = Some(Arc::new(move |z| dzb(z + shift)));
        }
        out
    }

    /// Pointwise sum; derivatives combine when both sides carry them, the
    /// bound is the sum of bounds.
    pub fn add(&self, other: &Symbol) -> Symbol {
        let (e1, e2) = (self.eval.clone(), other.eval.clone());
        let mut out = Symbol {
            name: alloc::format!("{}+{}", self.name, other.name),
            eval: Arc::new(move |z| e1(z) + e2(z)),
            d_z: None,
            d_zbar: None,
            sup_bound: match (self.sup_bound, other.sup_bound) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
        };
        if let (Some(a), Some(b)) = (self.d_z.clone(), other.d_z.clone()) {
            out.d_z = Some(Arc::new(move |z| a(z) + b(z)));
        }
        if let (Some(a), Some(b)) = (self.d_zbar.clone(), other.d_zbar.clone()) {
            out.d_zbar = Some(Arc::new(move |z| a(z) + b(z)));
        }
        out
    }

    /// Scalar multiple.
    pub fn scale(&self, c: Complex64) -> Symbol {
        let eval = self.eval.clone();
        let mut out = Symbol {
            name: alloc::format!("{}*c", self.name),
            eval: Arc::new(move |z| c * eval(z)),
            d_z: None,
            d_zbar: None,
            sup_bound: self.sup_bound.map(|b| b * c.norm()),
        };
        if let Some(d) = self.d_z.clone() {
            out.d_z = Some(Arc::new(move |z| c * d(z)));
        }
        if let Some(d) = self.d_zbar.clone() {
            out.d_zbar = Some(Arc::new(move |z| c * d(z)));
        }
        out
    }

    /// Pointwise product (no derivative propagation; used for `f g` symbols
    /// in composition-defect assemblies where only values are needed).
    pub fn product_values(&self, other: &Symbol) -> Symbol {
        let (e1, e2) = (self.eval.clone(), other.eval.clone());
        Symbol {
            name: alloc::format!("{}*{}", self.name, other.name),
            eval: Arc::new(move |z| e1(z) * e2(z)),
            d_z: None,
            d_zbar: None,
            sup_bound: match (self.sup_bound, other.sup_bound) {
                (Some(a), Some(b)) => Some(a * b),
                _ => None,
            },
        }
    }

    /// Check supplied derivatives against central differences (step 1e-5) at
    /// the given points; relative tolerance 1e-3.
    pub fn verify_derivatives(&self, points: &[Complex64]) -> Result<()> {
        if !self.has_derivatives() {
            return Err(Error::MissingDerivative {
                symbol: self.name.clone(),
            });
        }
        let h = 1e-5;
        for &z in points {
            let fx = (self.eval(z + Complex64::new(h, 0.0)) - self.eval(z - Complex64::new(h, 0.0)))
                / (2.0 * h);
            let fy = (self.eval(z + Complex64::new(0.0, h)) - self.eval(z - Complex64::new(0.0, h)))
                / (2.0 * h);
            let dz_fd = 0.5 * (fx - Complex64::new(0.0, 1.0) * fy);
            let dzb_fd = 0.5 * (fx + Complex64::new(0.0, 1.0) * fy);
            let dz = self.d_z(z)?;
            let dzb = self.d_zbar(z)?;
            let scale = dz.norm().max(dzb.norm()).max(1e-6);
            if (dz - dz_fd).norm() > 1e-3 * scale || (dzb - dzb_fd).norm() > 1e-3 * scale {
                return Err(Error::InvariantViolation {
                    what: alloc::format!(
                        "derivatives of '{}' disagree with finite differences at z = {}+{}i",
                        self.name,
                        z.re,
                        z.im
                    ),
                });
            }
        }
        Ok(())
    }

    /// Check the declared bound at sample points.
    pub fn verify_bound(&self, points: &[Complex64]) -> Result<()> {
        if let Some(b) = self.sup_bound {
            for &z in points {
                if self.eval(z).norm() > b + 1e-12 {
                    return Err(Error::InvariantViolation {
                        what: alloc::format!("'{}' exceeds its declared bound at a sample", self.name),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Polynomial `sum a_k z^k` as a symbol (entire, d_zbar = 0).
pub fn polynomial(name: impl Into<String>, coeffs: Vec<Complex64>) -> Symbol {
    let c1 = coeffs.clone();
    let c2 = coeffs.clone();
    Symbol {
        name: name.into(),
        eval: Arc::new(move |z| horner(&c1, z)),
        d_z: Some(Arc::new(move |z| horner_deriv(&c2, z))),
        d_zbar: Some(Arc::new(|_| Complex64::new(0.0, 0.0))),
        sup_bound: None,
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

fn horner_deriv(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * z + c * k as f64;
    }
    acc
}

/// Built-in corpus. Every acceptance criterion references these ids.
pub mod corpus {
    use super::*;

    /// `zbar`: conj(z). Unbounded.
    pub fn zbar() -> Symbol {
        Symbol::new("zbar", |z| z.conj()).with_derivatives(
            |_| Complex64::new(0.0, 0.0),
            |_| Complex64::new(1.0, 0.0),
        )
    }

    /// `phase`: e^{i Re z}.
    pub fn phase() -> Symbol {
        Symbol::new("phase", |z| {
            Complex64::new(math::cos(z.re), math::sin(z.re))
        })
        .with_derivatives(
            |z| Complex64::new(0.0, 0.5) * Complex64::new(math::cos(z.re), math::sin(z.re)),
            |z| Complex64::new(0.0, 0.5) * Complex64::new(math::cos(z.re), math::sin(z.re)),
        )
        .with_bound(1.0)
    }

    /// `sinre`: sin(Re z).
    pub fn sinre() -> Symbol {
        Symbol::new("sinre", |z| Complex64::new(math::sin(z.re), 0.0))
            .with_derivatives(
                |z| Complex64::new(0.5 * math::cos(z.re), 0.0),
                |z| Complex64::new(0.5 * math::cos(z.re), 0.0),
            )
            .with_bound(1.0)
    }

    /// `sinabs2`: sin(|z|^2).
    pub fn sinabs2() -> Symbol {
        Symbol::new("sinabs2", |z| Complex64::new(math::sin(z.norm_sqr()), 0.0))
            .with_derivatives(
                |z| z.conj() * math::cos(z.norm_sqr()),
                |z| z * math::cos(z.norm_sqr()),
            )
            .with_bound(1.0)
    }

    /// `decaybar`: conj(z) (1+|z|^2)^{-1/2}. Bounded with vanishing d-bar
    /// envelope at infinity.
    pub fn decaybar() -> Symbol {
        Symbol::new("decaybar", |z| {
            z.conj() * math::powf(1.0 + z.norm_sqr(), -0.5)
        })
        .with_derivatives(
            |z| {
                let u = z.norm_sqr();
                z.conj() * z.conj() * (-0.5 * math::powf(1.0 + u, -1.5))
            },
            |z| {
                let u = z.norm_sqr();
                Complex64::new((1.0 + 0.5 * u) * math::powf(1.0 + u, -1.5), 0.0)
            },
        )
        .with_bound(1.0)
    }

    /// `decaybar` multiplied by a smooth radial cutoff (plateau to |z| = 2,
    /// gone past |z| = 3). Both its d-bar envelope and its conjugate's vanish
    /// outside a compact set, which the slow 1/|z| tail of the raw symbol's
    /// conjugate does not do at probe-ring scale.
    pub fn decaybar_smoothed() -> Symbol {
        use crate::geometry::{bump_profile, bump_profile_deriv};
        const R0: f64 = 4.0;
        let chi = |z: Complex64| bump_profile(z.norm() / R0);
        let chi_dbar = |z: Complex64| {
            let d = z.norm();
            if d < 1e-300 {
                Complex64::new(0.0, 0.0)
            } else {
                z * (bump_profile_deriv(d / R0) / (R0 * 2.0 * d))
            }
        };
        let base = decaybar();
        let (b1, b2, b3) = (base.clone(), base.clone(), base.clone());
        Symbol::new("decaybar_smoothed", move |z| b1.eval(z) * chi(z))
            .with_derivatives(
                move |z| b2.d_z(z).expect("closed form") * chi(z) + b2.eval(z) * chi_dbar(z).conj(),
                move |z| b3.d_zbar(z).expect("closed form") * chi(z) + b3.eval(z) * chi_dbar(z),
            )
            .with_bound(1.0)
    }

    /// All corpus symbols, in the canonical id order.
    pub fn all() -> Vec<Symbol> {
        alloc::vec![zbar(), phase(), sinre(), sinabs2(), decaybar()]
    }

    /// Lookup by id.
    pub fn by_id(id: &str) -> Result<Symbol> {
        match id {
            "zbar" => Ok(zbar()),
            "phase" => Ok(phase()),
            "sinre" => Ok(sinre()),
            "sinabs2" => Ok(sinabs2()),
            "decaybar" => Ok(decaybar()),
            other => Err(invalid(alloc::format!("unknown symbol id '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn sample_points(n: usize, radius: f64, seed: u64) -> Vec<Complex64> {
        let mut s = seed.max(1);
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        (0..n)
            .map(|_| {
                let rho = radius * next().sqrt();
                let th = 2.0 * core::f64::consts::PI * next();
                c64(rho * th.cos(), rho * th.sin())
            })
            .collect()
    }

    #[test]
    fn corpus_derivatives_pass_the_finite_difference_check() {
        let pts = sample_points(100, 5.0, 13);
        for s in corpus::all() {
            s.verify_derivatives(&pts).unwrap();
            s.verify_bound(&pts).unwrap();
        }
    }

    #[test]
    fn conjugation_swaps_derivatives() {
        let f = corpus::decaybar();
        let g = f.conj();
        let z = c64(1.2, -0.7);
        assert!((g.eval(z) - f.eval(z).conj()).norm() < 1e-15);
        assert!((g.d_z(z).unwrap() - f.d_zbar(z).unwrap().conj()).norm() < 1e-15);
        assert!((g.d_zbar(z).unwrap() - f.d_z(z).unwrap().conj()).norm() < 1e-15);
        g.verify_derivatives(&sample_points(50, 4.0, 29)).unwrap();
    }

    #[test]
    fn polynomials_are_entire() {
        let p = polynomial("p", alloc::vec![c64(1.0, 0.0), c64(0.0, 2.0), c64(-1.0, 0.0)]);
        let z = c64(0.5, 0.5);
        // p(z) = 1 + 2i z - z^2
        let want = c64(1.0, 0.0) + c64(0.0, 2.0) * z - z * z;
        assert!((p.eval(z) - want).norm() < 1e-15);
        assert!(p.d_zbar(z).unwrap().norm() == 0.0);
        p.verify_derivatives(&sample_points(40, 3.0, 7)).unwrap();
    }

    #[test]
    fn missing_derivatives_are_reported() {
        let s = Symbol::new("opaque", |z| z);
        assert!(matches!(
            s.d_zbar(c64(0.0, 0.0)),
            Err(Error::MissingDerivative { .. })
        ));
    }

    #[test]
    fn corpus_lookup() {
        assert!(corpus::by_id("zbar").is_ok());
        assert!(corpus::by_id("nope").is_err());
    }
}
