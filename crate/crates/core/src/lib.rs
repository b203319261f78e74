//! Numerical laboratory for Hankel and Toeplitz operators on Gaussian-weighted
//! spaces of entire functions.
//!
//! The crate builds, on a truncated monomial basis, the objects needed to probe
//! operator-theoretic statements about multiplication-then-project operators:
//!
//! * weights, quadrature rules, the reproducing kernel and the orthogonal
//!   projection ([`weight`], [`quadrature`], [`basis`], [`fock`]);
//! * lattices and smooth partitions of unity ([`geometry`]);
//! * the local integral distance to holomorphic functions, oscillation
//!   functionals and symbol decompositions ([`ida`]);
//! * truncated operator matrices, norms and compactness probes ([`operators`]);
//! * a weighted d-bar solution operator, a principal-value transform realized
//!   as a Fourier multiplier, and related derivative inequalities ([`dbar`]);
//! * the semiclassical composition defect over a scale schedule
//!   ([`quantization`]).
//!
//! Everything is deterministic: quadrature sums are reduced in a fixed pairwise
//! tree and no operation depends on scheduling. The crate is `no_std`-compatible
//! (`--no-default-features`; float math then goes through `libm`) with `alloc`
//! required. IO, CSV schemas and the experiment runner live in the companion
//! `fockbench` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod basis;
pub mod dbar;
pub mod error;
pub mod fft;
pub mod fock;
pub mod geometry;
pub mod ida;
pub mod linalg;
pub(crate) mod math;
pub mod operators;
pub mod quadrature;
pub mod quantization;
pub mod suite;
pub mod sum;
pub mod symbol;
pub mod weight;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Shorthand used throughout: `c64(re, im)`.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
