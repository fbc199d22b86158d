//! One copy of each of two unknown qudit states (`N = M = 1`, dimension `d`).
//!
//! Two qudits split into the antisymmetric and symmetric subspaces, so the
//! optimal POVM again has one guess per block. The closed-form moments below
//! satisfy the sum rules `sum I^0 = 1`, `sum I^1 = 1/d` and
//! `sum I^2 = 2/(d(d+1))`, and agree with [`permutation_trace_oracle`] for
//! every dimension it can reach.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::dense::{apply_weights, reference_weights, symmetrizer, ScaledMatrix};
use crate::parallel::MomentTriple;
use crate::{rational_to_f64, Error, Result};

/// Exact moments of the two blocks for dimension `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuditMoments {
    pub d: u32,
    pub antisym: MomentTriple,
    pub sym: MomentTriple,
}

fn r(numer: i128, denom: i128) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

fn check_dim(d: u32) -> Result<i128> {
    if d < 2 {
        return Err(Error::Argument(format!("qudit dimension must be >= 2, got {d}")));
    }
    Ok(i128::from(d))
}

pub fn qudit_moments(d: u32) -> Result<QuditMoments> {
    let d_ = check_dim(d)?;
    let cubic = d_ * (d_ + 1) * (d_ + 2);
    Ok(QuditMoments {
        d,
        antisym: MomentTriple {
            i0: r(d_ - 1, 2 * d_),
            i1: r(d_ - 1, 2 * d_ * (d_ + 1)),
            i2: r(d_ - 1, cubic),
        },
        sym: MomentTriple {
            i0: r(d_ + 1, 2 * d_),
            i1: r(d_ + 3, 2 * d_ * (d_ + 1)),
            i2: r(d_ + 5, cubic),
        },
    })
}

/// The antisymmetric-block first moment as it is usually printed,
/// `(d-2)/(2d(d+1))`. It violates the `1/d` sum rule and is kept only for
/// comparison.
pub fn printed_antisym_i1(d: u32) -> Result<BigRational> {
    let d_ = check_dim(d)?;
    Ok(r(d_ - 2, 2 * d_ * (d_ + 1)))
}

/// Minimal mean variance from the closed-form moments alongside the widely
/// quoted closed expression
/// `2/(d^2+d) - (d-2)^2/(2d(d+1)^2(d-1)) - (d+3)^2/(2d(d+1)^3)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditVariance {
    pub derived: BigRational,
    pub paper_formula: BigRational,
}

impl QuditVariance {
    /// True when the two expressions disagree.
    pub fn flagged(&self) -> bool {
        self.derived != self.paper_formula
    }

    pub fn derived_f64(&self) -> f64 {
        rational_to_f64(&self.derived)
    }

    pub fn paper_formula_f64(&self) -> f64 {
        rational_to_f64(&self.paper_formula)
    }
}

pub fn qudit_variance(d: u32) -> Result<QuditVariance> {
    let mo = qudit_moments(d)?;
    let block = |t: &MomentTriple| &t.i2 - &t.i1 * &t.i1 / &t.i0;
    let derived = block(&mo.antisym) + block(&mo.sym);
    let d_ = i128::from(d);
    let paper_formula = r(2, d_ * d_ + d_)
        - r((d_ - 2) * (d_ - 2), 2 * d_ * (d_ + 1) * (d_ + 1) * (d_ - 1))
        - r((d_ + 3) * (d_ + 3), 2 * d_ * (d_ + 1) * (d_ + 1) * (d_ + 1));
    Ok(QuditVariance {
        derived,
        paper_formula,
    })
}

/// Optimal guesses `(antisymmetric, symmetric)`.
pub fn optimal_guesses(d: u32) -> Result<(BigRational, BigRational)> {
    let mo = qudit_moments(d)?;
    Ok((mo.antisym.guess(), mo.sym.guess()))
}

/// `(1/2) sum_{k,l} (|kl> + sign |lk>) <kl|`.
fn two_site_projector(d: usize, sign: i128) -> ScaledMatrix {
    let dim = d * d;
    let mut entries = vec![0i128; dim * dim];
    for k in 0..d {
        for l in 0..d {
            let col = k * d + l;
            entries[col * dim + col] += 1;
            entries[(l * d + k) * dim + col] += sign;
        }
    }
    ScaledMatrix::from_parts(dim, entries, 2)
}

/// Moments from explicit projectors and exact traces, for `2 <= d <= 4`.
///
/// The block projectors are the literal antisymmetrizer and symmetrizer on
/// two qudits; the reference symmetric projectors on two and three qudits
/// are built by averaging permutation operators.
pub fn permutation_trace_oracle(d: u32) -> Result<QuditMoments> {
    if !(2..=4).contains(&d) {
        return Err(Error::Argument(format!(
            "dense qudit oracle supports 2 <= d <= 4, got {d}"
        )));
    }
    let du = d as usize;
    let antisym = two_site_projector(du, -1);
    let sym = two_site_projector(du, 1);
    debug_assert_eq!(sym, symmetrizer(du, 2));
    let weights: Vec<_> = (0..3).map(|alpha| reference_weights(du, &[0], 1, alpha)).collect();
    let triple = |p: &ScaledMatrix| MomentTriple {
        i0: apply_weights(p, &weights[0]),
        i1: apply_weights(p, &weights[1]),
        i2: apply_weights(p, &weights[2]),
    };
    Ok(QuditMoments {
        d,
        antisym: triple(&antisym),
        sym: triple(&sym),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::{moments, optimal_variance, IrrepLabel};
    use crate::rational;

    #[test]
    fn qubit_case_matches_parallel_moments() {
        let q = qudit_moments(2).unwrap();
        let p = moments(1, 1).unwrap();
        assert_eq!(q.antisym, p[&IrrepLabel::new(0)]);
        assert_eq!(q.sym, p[&IrrepLabel::new(2)]);
    }

    #[test]
    fn qutrit_antisymmetric_weight() {
        assert_eq!(qudit_moments(3).unwrap().antisym.i0, rational(1, 3));
    }

    #[test]
    fn sum_rules_hold_exactly() {
        for d in 2..=10u32 {
            let q = qudit_moments(d).unwrap();
            let d_ = i64::from(d);
            assert_eq!(&q.antisym.i0 + &q.sym.i0, rational(1, 1));
            assert_eq!(&q.antisym.i1 + &q.sym.i1, rational(1, d_));
            assert_eq!(&q.antisym.i2 + &q.sym.i2, rational(2, d_ * (d_ + 1)));
            // The printed antisymmetric first moment breaks the 1/d rule.
            assert_ne!(printed_antisym_i1(d).unwrap() + &q.sym.i1, rational(1, d_));
        }
    }

    #[test]
    fn oracle_agrees_with_closed_forms() {
        for d in 2..=4 {
            assert_eq!(permutation_trace_oracle(d).unwrap(), qudit_moments(d).unwrap());
        }
        assert!(permutation_trace_oracle(5).is_err());
        assert!(permutation_trace_oracle(1).is_err());
    }

    #[test]
    fn oracle_decides_antisymmetric_first_moment() {
        let o = permutation_trace_oracle(3).unwrap();
        assert_eq!(o.antisym.i1, rational(1, 12));
        assert_ne!(o.antisym.i1, printed_antisym_i1(3).unwrap());
        assert_eq!(printed_antisym_i1(3).unwrap(), rational(1, 24));
    }

    #[test]
    fn antisymmetrizer_trace() {
        for d in 2..=4usize {
            let a = two_site_projector(d, -1);
            assert_eq!(a.trace(), rational((d * (d - 1) / 2) as i64, 1));
            assert_eq!(a.mul(&a), a);
        }
    }

    #[test]
    fn variance_at_two_matches_table_and_flags_formula() {
        let v = qudit_variance(2).unwrap();
        assert_eq!(v.derived, rational(2, 27));
        assert_eq!(v.derived, optimal_variance(1, 1).unwrap().exact);
        assert_eq!(v.paper_formula, rational(11, 108));
        assert!(v.flagged());
    }

    #[test]
    fn derived_variance_closed_form_and_decay() {
        let mut prev = None;
        for d in 2..=100u32 {
            let v = qudit_variance(d).unwrap().derived;
            let d_ = i64::from(d);
            // (d-1)(d+2) / (d (d+1)^3)
            assert_eq!(v, rational((d_ - 1) * (d_ + 2), d_ * (d_ + 1).pow(3)));
            assert!(v > rational(0, 1));
            if let Some(p) = prev {
                assert!(v < p, "not decreasing at d={d}");
            }
            prev = Some(v);
        }
        for d in [1_000u32, 1_000_000] {
            let scaled = qudit_variance(d).unwrap().derived_f64() * f64::from(d).powi(2);
            assert!((scaled - 1.0).abs() < 5.0 / f64::from(d), "d={d}: {scaled}");
        }
    }

    #[test]
    fn optimal_guesses_closed_form() {
        for d in 2..=12u32 {
            let (a, s) = optimal_guesses(d).unwrap();
            let d_ = i64::from(d);
            assert_eq!(a, rational(1, d_ + 1));
            assert_eq!(s, rational(d_ + 3, (d_ + 1) * (d_ + 1)));
        }
        let (a, s) = optimal_guesses(2).unwrap();
        assert_eq!((a, s), (rational(1, 3), rational(5, 9)));
    }
}
