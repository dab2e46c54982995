//! Exact moment valuations of horizontal `p`-adic measures.
//!
//! Everything numeric is generic over the coefficient field (exact
//! rationals by default) or the real type used for period integrals
//! (`f64` or arbitrary-precision [`real::MpFloat`]). The aliases below fix
//! the choices used by the command-line driver.

pub mod curve;
pub mod cyclotomic;
pub mod digit;
pub mod error;
pub mod horizontal;
pub mod measure;
pub mod moments;
pub mod pipeline;
pub mod real;
pub mod scalar;
pub mod verify;
pub mod weierstrass;

pub use error::{Error, Result};

use num_rational::BigRational;

/// Element of `Q(ζ_{p^k})` with exact rational coefficients.
pub type CyclotomicNumber = cyclotomic::Cyclotomic<BigRational>;
/// Measure on a finite product of `Z/p^{m_i}` with exact coefficients.
pub type FiniteLevelMeasure = measure::Measure<BigRational>;
pub type VerticalMeasure = digit::VerticalMeasure<BigRational>;
pub type AmicePolynomial = digit::AmicePolynomial<BigRational>;
/// Symbols computed with arbitrary-precision periods.
pub type ModularSymbols = curve::ModularSymbols<real::MpFloat>;
/// Symbols computed in hardware floats (small conductors and bounds).
pub type FastModularSymbols = curve::ModularSymbols<f64>;
