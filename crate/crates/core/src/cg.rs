//! Exact SU(2) coupling kernel.
//!
//! Clebsch-Gordan coefficients are evaluated with the Racah closed-form sum
//! over arbitrary-precision rationals, in the Condon-Shortley phase
//! convention. A coefficient is returned as a [`SignedSqrtRational`], i.e.
//! `sign * sqrt(square)` with `square` an exact rational.

use std::fmt;
use std::ops::{Mul, Neg};
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{rational_to_f64, Error, HalfInt, Result};

/// `sign * sqrt(square)` with an exact rational `square >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedSqrtRational {
    sign: i8,
    square: BigRational,
}

impl SignedSqrtRational {
    pub fn new(sign: i8, square: BigRational) -> Result<Self> {
        if square.is_negative() {
            return Err(Error::Argument(format!("negative radicand {square}")));
        }
        match (sign, square.is_zero()) {
            (0, true) => Ok(Self::zero()),
            (-1 | 1, false) => Ok(Self { sign, square }),
            _ => Err(Error::Argument(format!(
                "sign {sign} inconsistent with radicand {square}"
            ))),
        }
    }

    pub fn zero() -> Self {
        Self {
            sign: 0,
            square: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Self {
            sign: 1,
            square: BigRational::one(),
        }
    }

    /// Builds `sign(r) * sqrt(|r|)`.
    pub fn from_signed_square(r: BigRational) -> Self {
        let sign = if r.is_zero() {
            0
        } else if r.is_negative() {
            -1
        } else {
            1
        };
        Self {
            sign,
            square: r.abs(),
        }
    }

    /// An exact rational `r`, stored as `sign(r) * sqrt(r^2)`.
    pub fn from_rational(r: &BigRational) -> Self {
        let mut out = Self::from_signed_square(r * r);
        if r.is_negative() {
            out.sign = -1;
        }
        out
    }

    #[inline]
    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// The square of the represented value.
    #[inline]
    pub fn square(&self) -> &BigRational {
        &self.square
    }

    /// `sign * square`, the compact encoding used for products.
    pub fn signed_square(&self) -> BigRational {
        match self.sign {
            -1 => -self.square.clone(),
            _ => self.square.clone(),
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * rational_to_f64(&self.square).sqrt()
    }
}

impl Mul for &SignedSqrtRational {
    type Output = SignedSqrtRational;
    fn mul(self, rhs: Self) -> SignedSqrtRational {
        SignedSqrtRational::from_signed_square(self.signed_square() * rhs.signed_square())
    }
}

impl Mul for SignedSqrtRational {
    type Output = SignedSqrtRational;
    fn mul(self, rhs: Self) -> SignedSqrtRational {
        &self * &rhs
    }
}

impl Neg for SignedSqrtRational {
    type Output = SignedSqrtRational;
    fn neg(mut self) -> SignedSqrtRational {
        self.sign = -self.sign;
        self
    }
}

impl fmt::Display for SignedSqrtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => {
                let sign = if s < 0 { "-" } else { "" };
                write!(f, "{sign}sqrt({})", crate::format_rational(&self.square))
            }
        }
    }
}

fn factorial_table() -> &'static RwLock<Vec<BigUint>> {
    static TABLE: OnceLock<RwLock<Vec<BigUint>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(vec![BigUint::one()]))
}

/// `n!`, memoized in a process-wide table that grows under a write lock
/// and is otherwise read concurrently.
pub fn factorial(n: usize) -> BigUint {
    {
        let table = factorial_table().read().expect("factorial table poisoned");
        if let Some(v) = table.get(n) {
            return v.clone();
        }
    }
    let mut table = factorial_table().write().expect("factorial table poisoned");
    while table.len() <= n {
        let k = table.len();
        let next = &table[k - 1] * BigUint::from(k);
        table.push(next);
    }
    table[n].clone()
}

fn check_label(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.twice() < 0 {
        return Err(Error::Domain(format!("negative spin j={j}")));
    }
    if (j.twice() - m.twice()) % 2 != 0 {
        return Err(Error::Domain(format!("j={j}, m={m}: j-m is not an integer")));
    }
    if m.twice().abs() > j.twice() {
        return Err(Error::Domain(format!("|m| > j for j={j}, m={m}")));
    }
    Ok(())
}

/// True when `j3` can appear in `j1 (x) j2`.
pub fn triangle(j1: HalfInt, j2: HalfInt, j3: HalfInt) -> bool {
    let (a, b, c) = (j1.twice(), j2.twice(), j3.twice());
    c >= (a - b).abs() && c <= a + b && (a + b + c) % 2 == 0
}

/// The Clebsch-Gordan coefficient `<j,m | j1,m1; j2,m2>` (Condon-Shortley).
///
/// Returns an exact zero when `m1 + m2 != m` or the triangle rule fails.
pub fn cg(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<SignedSqrtRational> {
    check_label(j1, m1)?;
    check_label(j2, m2)?;
    check_label(j, m)?;
    if m1 + m2 != m || !triangle(j1, j2, j) {
        return Ok(SignedSqrtRational::zero());
    }
    let (tj1, tm1, tj2, tm2, tj, tm) = (
        j1.twice(),
        m1.twice(),
        j2.twice(),
        m2.twice(),
        j.twice(),
        m.twice(),
    );
    // Every combination below is an even number by the checks above.
    let half = |t: i32| -> usize {
        debug_assert!(t >= 0 && t % 2 == 0, "odd or negative factorial argument {t}");
        (t / 2) as usize
    };
    let f = |t: i32| BigInt::from(factorial(half(t)));

    let mut prefactor_num = BigInt::from(tj + 1)
        * f(tj + tj1 - tj2)
        * f(tj - tj1 + tj2)
        * f(tj1 + tj2 - tj);
    prefactor_num = prefactor_num
        * f(tj + tm)
        * f(tj - tm)
        * f(tj1 - tm1)
        * f(tj1 + tm1)
        * f(tj2 - tm2)
        * f(tj2 + tm2);
    let prefactor_den = BigInt::from(factorial(half(tj1 + tj2 + tj) + 1));

    // k runs over every value keeping all six factorial arguments >= 0.
    let a = (tj1 + tj2 - tj) / 2;
    let b = (tj1 - tm1) / 2;
    let c = (tj2 + tm2) / 2;
    let d = (tj - tj2 + tm1) / 2;
    let e = (tj - tj1 - tm2) / 2;
    let k_min = 0.max(-d).max(-e);
    let k_max = a.min(b).min(c);

    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = BigInt::from(factorial(k as usize))
            * BigInt::from(factorial((a - k) as usize))
            * BigInt::from(factorial((b - k) as usize))
            * BigInt::from(factorial((c - k) as usize))
            * BigInt::from(factorial((d + k) as usize))
            * BigInt::from(factorial((e + k) as usize));
        let sign = if k % 2 == 0 { 1 } else { -1 };
        sum += BigRational::new(BigInt::from(sign), denom);
    }

    let square = BigRational::new(prefactor_num, prefactor_den) * &sum * &sum;
    let sign = if sum.is_zero() {
        0
    } else if sum.is_negative() {
        -1
    } else {
        1
    };
    SignedSqrtRational::new(sign, square)
}

/// `|<j,m | j1,m1; j2,m2>|^2` as an exact rational.
pub fn cg_squared(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<BigRational> {
    cg(j1, m1, j2, m2, j, m).map(|c| c.square)
}

/// Dimension of the symmetric subspace of `n` systems of dimension `d`,
/// `binomial(n + d - 1, n)`.
pub fn sym_dim(d: u64, n: u64) -> Result<BigUint> {
    if d == 0 {
        return Err(Error::Argument("local dimension must be >= 1".into()));
    }
    Ok(num_integer::binomial(BigUint::from(n + d - 1), BigUint::from(n)))
}

/// Probability weight of `|j,m>` in a spin coherent state whose single-copy
/// overlap with the quantization axis state is `x`:
/// `binomial(2j, j+m) x^(j+m) (1-x)^(j-m)`.
pub fn coherent_weight(j: HalfInt, m: HalfInt, x: f64) -> Result<f64> {
    check_label(j, m)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Argument(format!("overlap {x} outside [0,1]")));
    }
    let n = j.twice() as u32;
    let up = ((j + m).twice() / 2) as u32;
    Ok(binomial_weight(n, up, x))
}

/// `binomial(n, k) x^k (1-x)^(n-k)` in double precision.
pub(crate) fn binomial_weight(n: u32, k: u32, x: f64) -> f64 {
    debug_assert!(k <= n);
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if x == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let k_small = k.min(n - k);
    let mut binom = 1.0f64;
    for i in 0..k_small {
        binom = binom * f64::from(n - i) / f64::from(i + 1);
    }
    let direct = binom * x.powi(k as i32) * (1.0 - x).powi((n - k) as i32);
    if binom.is_finite() && direct.is_normal() {
        return direct;
    }
    // Large n: fall back to log space.
    let ln_binom: f64 = (0..k_small)
        .map(|i| (f64::from(n - i) / f64::from(i + 1)).ln())
        .sum();
    (ln_binom + f64::from(k) * x.ln() + f64::from(n - k) * (1.0 - x).ln()).exp()
}

/// Exact [`coherent_weight`] for rational `x`.
pub fn coherent_weight_exact(j: HalfInt, m: HalfInt, x: &BigRational) -> Result<BigRational> {
    check_label(j, m)?;
    if x.is_negative() || x > &BigRational::one() {
        return Err(Error::Argument(format!("overlap {x} outside [0,1]")));
    }
    let n = j.twice() as usize;
    let up = ((j + m).twice() / 2) as usize;
    let binom = num_integer::binomial(BigInt::from(n), BigInt::from(up));
    let one_minus = BigRational::one() - x;
    Ok(BigRational::from_integer(binom)
        * num_traits::pow(x.clone(), up)
        * num_traits::pow(one_minus, n - up))
}
