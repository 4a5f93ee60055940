//! Core library of the cone-lab toolkit.
//!
//! Near a conical point an operator of order `mu` takes the form
//! `t^{-mu} * sum_j a_j(t) (-t d/dt)^j` with coefficients `a_j(t)` acting on
//! the cross-section of the cone.  This crate restricts the coefficients to
//! polynomials in the boundary Laplacian, so that every construction
//! diagonalises over the boundary eigenmodes and the Mellin-side algebra is
//! exact rational-function arithmetic:
//!
//! * [`boundary`] — eigenvalue/multiplicity model of the boundary Laplacian,
//! * [`operator`] — the cone operator itself (presets: `laplacian`, `example-abcd`),
//! * [`conormal`] — conormal symbols, their exact meromorphic inverses and the
//!   shifted symbol recursion,
//! * [`domains`] — minimal/maximal domains, asymptotics spaces, dilation
//!   invariant extensions, adjoints, Friedrichs extension,
//! * [`ellipticity`] — the three sector conditions, with both the rule system
//!   and an independent Bessel-mode ODE oracle for the model-cone condition,
//! * [`mellin`] — numerical Mellin transform and finite-rank Green actions
//!   with a contour-integral cross check,
//! * [`resolvent`] — per-mode resolvent solver on the unit-disk realization,
//!   spectral detection, norm-decay measurement and the heat Cauchy demo,
//! * [`acceptance`] — the end-to-end verification battery used by `selftest`.

pub mod acceptance;
pub mod bessel;
pub mod boundary;
pub mod conormal;
pub mod cutoff;
pub mod domains;
pub mod ellipticity;
pub mod error;
pub mod mellin;
pub mod operator;
pub mod quad;
pub mod rational;
pub mod resolvent;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Complex = num::complex::Complex64;
/// Exact rational scalar (arbitrary precision).
pub type Rat = num::BigRational;

/// Lift an `f64` into an exact rational.  Every finite double is a dyadic
/// rational, so this is lossless; it fails only on NaN/infinite input.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    num::BigRational::from_float(x)
}

/// Exact rational to nearest double.
pub fn rat_to_f64(r: &Rat) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
