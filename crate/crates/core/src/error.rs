//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

use num_complex::Complex64;

pub type Result<T> = core::result::Result<T, Error>;

/// Rejected inputs and violated invariants.
///
/// "Flagged" outcomes (non-converged local fits, insufficient seminorm extent,
/// indeterminate verdicts) are not errors; they travel inside the result
/// structs so the caller still gets the data.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A numeric precondition failed (`what` names the parameter and constraint).
    InvalidParameter { what: String },
    /// An integrand sample was NaN or infinite at a quadrature node.
    NonFiniteSample { index: usize, at: Complex64 },
    /// A closed-form-kernel operation was called with a non-standard weight.
    UnsupportedWeight { op: &'static str },
    /// Lattice spacing does not match the partition pairing rule.
    SpacingMismatch { expected: f64, got: f64 },
    /// Assembly growth check: integrand tail at the truncation radius is not
    /// negligible against its peak.
    GrowthCheck { tail_over_peak: f64, limit: f64 },
    /// Field data does not decay at the grid boundary.
    BoundaryDecay { boundary_max: f64, limit: f64 },
    /// Grid padding or resolution invariant violated.
    GridInvariant { what: String },
    /// A closed-form Wirtinger derivative was required but not supplied.
    MissingDerivative { symbol: String },
    /// Operation requires the bounded flag on the symbol.
    UnboundedSymbol { symbol: String, op: &'static str },
    /// Small-scale schedule goes below the resolution guard.
    ResolutionGuard { min_r: f64, guard: f64 },
    /// A stated invariant failed at runtime (dual-route disagreement, vanishing
    /// denominator with nonzero numerator, ...).
    InvariantViolation { what: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { what } => write!(f, "invalid parameter: {what}"),
            Error::NonFiniteSample { index, at } => write!(
                f,
                "non-finite sample at node {index} (z = {} + {}i)",
                at.re, at.im
            ),
            Error::UnsupportedWeight { op } => write!(
                f,
                "{op} needs the closed-form kernel and accepts only the standard weight; \
                 custom weights are quadrature-only"
            ),
            Error::SpacingMismatch { expected, got } => write!(
                f,
                "lattice spacing {got} does not match required {expected}"
            ),
            Error::GrowthCheck {
                tail_over_peak,
                limit,
            } => write!(
                f,
                "integrand tail at the truncation radius is {tail_over_peak:.3e} of peak \
                 (limit {limit:.0e}); enlarge the grid or reject the symbol"
            ),
            Error::BoundaryDecay {
                boundary_max,
                limit,
            } => write!(
                f,
                "field does not decay at the grid boundary (max {boundary_max:.3e}, limit {limit:.0e})"
            ),
            Error::GridInvariant { what } => write!(f, "grid invariant violated: {what}"),
            Error::MissingDerivative { symbol } => {
                write!(f, "symbol '{symbol}' has no closed-form d-bar derivative")
            }
            Error::UnboundedSymbol { symbol, op } => {
                write!(f, "{op} requires a bounded symbol; '{symbol}' is not flagged bounded")
            }
            Error::ResolutionGuard { min_r, guard } => write!(
                f,
                "schedule minimum r = {min_r} violates the resolution guard {guard}"
            ),
            Error::InvariantViolation { what } => write!(f, "invariant violation: {what}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(what: impl Into<String>) -> Error {
    Error::InvalidParameter { what: what.into() }
}
