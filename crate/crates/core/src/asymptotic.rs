//! One qubit measured against an infinitely long reference.
//!
//! With the reference known exactly, the POVM can be taken diagonal in the
//! reference basis, `diag(s0(x), s1(x))`, and the mean variance becomes
//! `int dx [s0(x) (x^2/2 - 2x/3 + 1/4) + s1(x) (x^2/2 - x/3 + 1/12)]`.
//! Each outcome's quadratic is minimized at its vertex.

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::{rational, rational_to_f64, Error, Result};

/// Guesses attached to the `|0>` and `|1>` outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalGuessPair {
    pub x0: BigRational,
    pub x1: BigRational,
}

impl DiagonalGuessPair {
    pub fn new(x0: BigRational, x1: BigRational) -> Result<Self> {
        for x in [&x0, &x1] {
            if x.is_negative() || x > &BigRational::one() {
                return Err(Error::Argument(format!("guess {x} outside [0,1]")));
            }
        }
        Ok(Self { x0, x1 })
    }
}

/// `[c0, c1, c2]` of the aligned-outcome cost `c0 + c1 x + c2 x^2`.
pub fn aligned_polynomial() -> [BigRational; 3] {
    [rational(1, 4), rational(-2, 3), rational(1, 2)]
}

/// `[c0, c1, c2]` of the flipped-outcome cost.
pub fn flipped_polynomial() -> [BigRational; 3] {
    [rational(1, 12), rational(-1, 3), rational(1, 2)]
}

fn eval(p: &[BigRational; 3], x: &BigRational) -> BigRational {
    &p[0] + &p[1] * x + &p[2] * x * x
}

fn vertex(p: &[BigRational; 3]) -> BigRational {
    -&p[1] / (&p[2] * rational(2, 1))
}

/// Cost of the POVM `s_i(x) = delta(x - x_i)`.
pub fn asymptotic_cost(g: &DiagonalGuessPair) -> BigRational {
    eval(&aligned_polynomial(), &g.x0) + eval(&flipped_polynomial(), &g.x1)
}

/// Double-precision [`asymptotic_cost`] for arbitrary real guesses.
pub fn asymptotic_cost_f64(x0: f64, x1: f64) -> f64 {
    (x0 * x0 / 2.0 - 2.0 * x0 / 3.0 + 0.25) + (x1 * x1 / 2.0 - x1 / 3.0 + 1.0 / 12.0)
}

/// The optimal guesses and the optimal variance, `((2/3, 1/3), 1/18)`.
pub fn asymptotic_optimum() -> (DiagonalGuessPair, BigRational) {
    let guesses = DiagonalGuessPair {
        x0: vertex(&aligned_polynomial()),
        x1: vertex(&flipped_polynomial()),
    };
    let value = asymptotic_cost(&guesses);
    (guesses, value)
}

pub fn asymptotic_value_f64() -> f64 {
    rational_to_f64(&asymptotic_optimum().1)
}
