//! Optimal estimation of the overlap `|<psi1|psi2>|^2` between two unknown
//! pure states given finitely many copies of each.
//!
//! The crate is organised bottom-up:
//!
//! * [`cg`] and [`halfint`]: exact SU(2) kernel (Racah-formula
//!   Clebsch-Gordan coefficients over arbitrary-precision rationals).
//! * [`parallel`]: identically prepared qubit copies, exact moment
//!   integrals, optimal diagonal POVM and minimal mean variance.
//! * [`qudit`]: the one-copy-each qudit case with a permutation-trace oracle.
//! * [`asymptotic`]: one qubit against a classical reference axis.
//! * [`antiparallel`]: a direction encoded by an orthogonal qubit pair.
//! * [`simulator`]: Monte Carlo verification of all of the above.
//! * [`dense`]: exact dense-matrix oracles used to cross-check closed forms.
//!
//! Data-parallel loops (shots, optimizer restarts, parameter sweeps) run on
//! rayon when the `parallel` feature is enabled and fall back to plain
//! iterators otherwise. Results do not depend on which path ran.

pub mod antiparallel;
pub mod asymptotic;
pub mod cg;
pub mod dense;
mod error;
pub mod exec;
pub mod halfint;
pub mod parallel;
pub mod qudit;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
pub use exec::Execution;
pub use halfint::HalfInt;
pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;

/// Formats an exact rational as `p/q`, or `p` when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest `f64` to an exact rational.
///
/// Goes through a scaled integer quotient so that huge numerators and
/// denominators (factorials of several hundred) do not overflow.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::{Signed, ToPrimitive, Zero};
    if r.is_zero() {
        return 0.0;
    }
    let numer = r.numer().abs();
    let denom = r.denom().clone();
    // Scale so the integer quotient carries at least 64 significant bits.
    let shift = denom.bits() as i64 - numer.bits() as i64 + 64;
    let quotient = if shift >= 0 {
        (numer << shift as usize) / denom
    } else {
        numer / (denom << (-shift) as usize)
    };
    let mantissa = quotient.to_f64().unwrap_or(f64::INFINITY);
    let value = mantissa * 2f64.powi(-(shift as i32));
    if r.is_negative() {
        -value
    } else {
        value
    }
}

pub(crate) fn rational(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}
