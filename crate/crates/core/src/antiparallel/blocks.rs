//! Exact construction of the block operators on three qubits and the check
//! of the moment coefficients they induce.
//!
//! Qubit order is `(a, b, c)`: `a, b` carry the orthogonal pair and `c` the
//! second state; computational index `4a + 2b + c`, bit `0` is spin up.
//! `|S;m>` couples `a, b` to spin 0 and then `c` to spin 1/2, `|T;m>` couples
//! `a, b` to spin 1 first, and `|Q;m>` is the spin-3/2 quartet.
//!
//! Every amplitude is a Condon-Shortley Clebsch-Gordan product, and every
//! operator entry lies in `Q + Q sqrt 3`, so all arithmetic is exact.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{AntiparallelPovm, INVARIANT_TOL};
use crate::cg::{cg, SignedSqrtRational};
use crate::dense::reference_weights;
use crate::{rational, rational_to_f64, Error, HalfInt, Result};

const DIM: usize = 8;

/// `a + b sqrt 3` with rational `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd3 {
    pub a: BigRational,
    pub b: BigRational,
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (p, q) = (r.numer().sqrt(), r.denom().sqrt());
    (&p * &p == *r.numer() && &q * &q == *r.denom()).then(|| BigRational::new(p, q))
}

impl Surd3 {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Self { a, b }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn rational(a: BigRational) -> Self {
        Self::new(a, BigRational::zero())
    }

    /// `b sqrt 3`.
    pub fn surd(b: BigRational) -> Self {
        Self::new(BigRational::zero(), b)
    }

    /// Converts `sign sqrt(s)`; fails unless `s` or `3 s` is a rational square.
    pub fn from_signed_sqrt(v: &SignedSqrtRational) -> Result<Self> {
        let sign = BigRational::from_integer(BigInt::from(v.sign()));
        if let Some(root) = rational_sqrt(v.square()) {
            return Ok(Self::rational(sign * root));
        }
        if let Some(root) = rational_sqrt(&(v.square() * rational(3, 1))) {
            return Ok(Self::surd(sign * root / rational(3, 1)));
        }
        Err(Error::Numerical(format!("{v} is not in Q(sqrt 3)")))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * 3f64.sqrt()
    }
}

impl Add for Surd3 {
    type Output = Surd3;
    fn add(self, o: Surd3) -> Surd3 {
        Surd3::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for Surd3 {
    type Output = Surd3;
    fn sub(self, o: Surd3) -> Surd3 {
        Surd3::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for Surd3 {
    type Output = Surd3;
    fn neg(self) -> Surd3 {
        Surd3::new(-self.a, -self.b)
    }
}

impl Mul for &Surd3 {
    type Output = Surd3;
    fn mul(self, o: &Surd3) -> Surd3 {
        Surd3::new(
            &self.a * &o.a + &self.b * &o.b * rational(3, 1),
            &self.a * &o.b + &self.b * &o.a,
        )
    }
}

impl fmt::Display for Surd3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fr = crate::format_rational;
        match (self.a.is_zero(), self.b.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", fr(&self.a)),
            (true, false) => write!(f, "{}*sqrt(3)", fr(&self.b)),
            (false, false) => write!(f, "{} + {}*sqrt(3)", fr(&self.a), fr(&self.b)),
        }
    }
}

/// A dense 8x8 operator with entries in `Q(sqrt 3)`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurdMatrix(Vec<Surd3>);

impl SurdMatrix {
    pub fn zeros() -> Self {
        SurdMatrix(vec![Surd3::zero(); DIM * DIM])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            m.0[i * DIM + i] = Surd3::rational(BigRational::one());
        }
        m
    }

    pub fn entry(&self, row: usize, col: usize) -> &Surd3 {
        &self.0[row * DIM + col]
    }

    /// `sum_m |u_m><v_m|` for real amplitude vectors whose pairwise
    /// products lie in `Q(sqrt 3)`.
    fn outer_sum(pairs: &[(&Amplitudes, &Amplitudes)]) -> Result<Self> {
        let mut m = Self::zeros();
        for (u, v) in pairs {
            for r in 0..DIM {
                for c in 0..DIM {
                    let term = Surd3::from_signed_sqrt(&(&u[r] * &v[c]))?;
                    let slot = &mut m.0[r * DIM + c];
                    *slot = slot.clone() + term;
                }
            }
        }
        Ok(m)
    }

    pub fn add(&self, o: &Self) -> Self {
        SurdMatrix(self.0.iter().zip(&o.0).map(|(x, y)| x.clone() + y.clone()).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut m = Self::zeros();
        for r in 0..DIM {
            for c in 0..DIM {
                m.0[r * DIM + c] = (0..DIM).fold(Surd3::zero(), |acc, k| {
                    acc + self.entry(r, k) * o.entry(k, c)
                });
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for r in 0..DIM {
            for c in 0..DIM {
                m.0[c * DIM + r] = self.entry(r, c).clone();
            }
        }
        m
    }

    pub fn trace(&self) -> Surd3 {
        (0..DIM).fold(Surd3::zero(), |acc, i| acc + self.entry(i, i).clone())
    }

    /// `sum weight * B[row, col]` over (row, col, weight) triples.
    pub fn apply_weights(&self, weights: &[(usize, usize, BigRational)]) -> Surd3 {
        weights.iter().fold(Surd3::zero(), |acc, (r, c, w)| {
            acc + &Surd3::rational(w.clone()) * self.entry(*r, *c)
        })
    }
}

fn bit_projection(bit: usize) -> HalfInt {
    if bit == 0 {
        HalfInt::HALF
    } else {
        -HalfInt::HALF
    }
}

/// Exact real amplitudes of one three-qubit state.
pub type Amplitudes = [SignedSqrtRational; DIM];

/// Amplitudes of the state that couples qubits `a, b` to spin `two_j12 / 2`
/// and then qubit `c` to total spin `two_j / 2` with projection `two_m / 2`.
fn coupled_state(two_j12: i32, two_j: i32, two_m: i32) -> Result<Amplitudes> {
    let (j12, j, m) = (
        HalfInt::from_twice(two_j12),
        HalfInt::from_twice(two_j),
        HalfInt::from_twice(two_m),
    );
    let mut amps: Amplitudes = std::array::from_fn(|_| SignedSqrtRational::zero());
    for (index, amp) in amps.iter_mut().enumerate() {
        let (ma, mb, mc) = (
            bit_projection(index >> 2 & 1),
            bit_projection(index >> 1 & 1),
            bit_projection(index & 1),
        );
        let m12 = ma + mb;
        if m12.twice().abs() > two_j12 || m12 + mc != m {
            continue;
        }
        let inner = cg(HalfInt::HALF, ma, HalfInt::HALF, mb, j12, m12)?;
        let outer = cg(j12, m12, HalfInt::HALF, mc, j, m)?;
        *amp = inner * outer;
    }
    Ok(amps)
}

/// The block basis vectors.
#[derive(Clone, Debug)]
pub struct BlockBasisExact {
    /// `|S; +1/2>, |S; -1/2>`.
    pub singlet: [Amplitudes; 2],
    /// `|T; +1/2>, |T; -1/2>`.
    pub triplet: [Amplitudes; 2],
    /// `|Q; 3/2>, ..., |Q; -3/2>`.
    pub quartet: [Amplitudes; 4],
}

impl BlockBasisExact {
    pub fn build() -> Result<Self> {
        let pair = |two_j12| -> Result<[Amplitudes; 2]> {
            Ok([coupled_state(two_j12, 1, 1)?, coupled_state(two_j12, 1, -1)?])
        };
        Ok(Self {
            singlet: pair(0)?,
            triplet: pair(2)?,
            quartet: [
                coupled_state(2, 3, 3)?,
                coupled_state(2, 3, 1)?,
                coupled_state(2, 3, -1)?,
                coupled_state(2, 3, -3)?,
            ],
        })
    }

    pub fn to_f64(&self) -> BlockBasis {
        let conv = |v: &Amplitudes| -> [f64; DIM] { std::array::from_fn(|i| v[i].to_f64()) };
        BlockBasis {
            singlet: [conv(&self.singlet[0]), conv(&self.singlet[1])],
            triplet: [conv(&self.triplet[0]), conv(&self.triplet[1])],
            quartet: std::array::from_fn(|i| conv(&self.quartet[i])),
        }
    }
}

/// Double-precision block basis for the simulator.
#[derive(Clone, Debug)]
pub struct BlockBasis {
    pub singlet: [[f64; DIM]; 2],
    pub triplet: [[f64; DIM]; 2],
    pub quartet: [[f64; DIM]; 4],
}

impl BlockBasis {
    pub fn build() -> Result<Self> {
        Ok(BlockBasisExact::build()?.to_f64())
    }
}

/// The five block operators `1_00, 1_11, 1_01, 1_10, 1_33`.
///
/// `1_01 = sum_m |S;m><T;m|` in the Condon-Shortley phase.
#[derive(Clone, Debug)]
pub struct BlockOperators {
    pub e00: SurdMatrix,
    pub e11: SurdMatrix,
    pub e01: SurdMatrix,
    pub e10: SurdMatrix,
    pub e33: SurdMatrix,
}

impl BlockOperators {
    pub fn build() -> Result<Self> {
        let b = BlockBasisExact::build()?;
        let diag = |vs: &[Amplitudes]| {
            let pairs: Vec<_> = vs.iter().map(|v| (v, v)).collect();
            SurdMatrix::outer_sum(&pairs)
        };
        let e01 = SurdMatrix::outer_sum(&[
            (&b.singlet[0], &b.triplet[0]),
            (&b.singlet[1], &b.triplet[1]),
        ])?;
        Ok(Self {
            e00: diag(&b.singlet)?,
            e11: diag(&b.triplet)?,
            e10: e01.transpose(),
            e01,
            e33: diag(&b.quartet)?,
        })
    }

    fn named(&self) -> [(&'static str, &SurdMatrix); 5] {
        [
            ("q00", &self.e00),
            ("q11", &self.e11),
            ("q01", &self.e01),
            ("q10", &self.e10),
            ("q33", &self.e33),
        ]
    }
}

/// One moment coefficient: the weight of a block function in `I_alpha(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientCheck {
    /// `alpha` in `I_alpha`.
    pub moment: usize,
    /// Block function: `q00`, `q11`, `q01+q10` or `q33`.
    pub block: &'static str,
    pub computed: Surd3,
    pub printed: Surd3,
}

impl CoefficientCheck {
    pub fn matches(&self) -> bool {
        self.computed == self.printed
    }
}

/// Outcome of [`block_structure_check`].
#[derive(Clone, Debug)]
pub struct BlockStructureReport {
    pub checks: Vec<CoefficientCheck>,
    /// `1_00 + 1_11 + 1_33 = 1`.
    pub completeness: bool,
    /// The three diagonal operators are orthogonal projectors and
    /// `1_01 1_10 = 1_00`, `1_10 1_01 = 1_11`.
    pub algebra: bool,
    pub quartet_trace: Surd3,
    /// `1_01` and `1_10` carry the same coefficient in every moment.
    pub off_diagonal_symmetric: bool,
    /// `[c0, c1, c2]` of `f01(x) = I2 - 2 x I1 + x^2 I0` restricted to `q01`.
    pub f01_derived: [Surd3; 3],
    /// `[c0, c1, c2]` of the printed `f01(x) = -x / (6 sqrt 3)`.
    pub f01_printed: [Surd3; 3],
}

impl BlockStructureReport {
    pub fn mismatches(&self) -> Vec<&CoefficientCheck> {
        self.checks.iter().filter(|c| !c.matches()).collect()
    }

    /// Every printed coefficient is reproduced and the operators are sound.
    pub fn passed(&self) -> bool {
        self.mismatches().is_empty()
            && self.completeness
            && self.algebra
            && self.off_diagonal_symmetric
    }

    /// True when the printed `f01` agrees with the one implied by the
    /// printed moment coefficients.
    pub fn f01_consistent(&self) -> bool {
        self.f01_derived == self.f01_printed
    }

    /// The coefficient of `block` in `I_moment`.
    pub fn coefficient(&self, moment: usize, block: &str) -> Option<&Surd3> {
        self.checks
            .iter()
            .find(|c| c.moment == moment && c.block == block)
            .map(|c| &c.computed)
    }
}

/// Printed coefficients of `q00, q11, q01+q10, q33` in `I0, I1, I2`.
fn printed_coefficients() -> [[Surd3; 4]; 3] {
    let q = |p, d| Surd3::rational(rational(p, d));
    // -1/(12 sqrt 3) = -sqrt(3)/36
    let off = || Surd3::surd(rational(-1, 36));
    [
        [q(1, 2), q(1, 6), Surd3::zero(), q(1, 3)],
        [q(1, 4), q(1, 12), off(), q(1, 6)],
        [q(1, 6), q(1, 18), off(), q(1, 9)],
    ]
}

/// Coefficients `[alpha][block]` for blocks `q00, q11, q01, q10, q33`.
fn computed_coefficients(ops: &BlockOperators) -> [[Surd3; 5]; 3] {
    std::array::from_fn(|alpha| {
        let weights = reference_weights(2, &[0, 1], 1, alpha);
        let named = ops.named();
        std::array::from_fn(|i| named[i].1.apply_weights(&weights))
    })
}

/// Builds the block operators from Clebsch-Gordan coefficients and checks
/// by exact arithmetic that they reproduce the printed coefficients of
/// `I0 = 1/2 q00 + 1/6 q11 + 1/3 q33`,
/// `I1 = 1/4 q00 + 1/12 q11 - (q01 + q10)/(12 sqrt 3) + 1/6 q33`,
/// `I2 = 1/6 q00 + 1/18 q11 - (q01 + q10)/(12 sqrt 3) + 1/9 q33`.
pub fn block_structure_check() -> Result<BlockStructureReport> {
    let ops = BlockOperators::build()?;
    let computed = computed_coefficients(&ops);
    let printed = printed_coefficients();
    let labels = ["q00", "q11", "q01+q10", "q33"];
    let mut checks = Vec::new();
    for alpha in 0..3 {
        let row = &computed[alpha];
        let values = [&row[0], &row[1], &row[2], &row[4]];
        for (i, label) in labels.iter().enumerate() {
            checks.push(CoefficientCheck {
                moment: alpha,
                block: label,
                computed: values[i].clone(),
                printed: printed[alpha][i].clone(),
            });
        }
    }
    let off_diagonal_symmetric = computed.iter().all(|row| row[2] == row[3]);
    let identity = SurdMatrix::identity();
    let completeness = ops.e00.add(&ops.e11).add(&ops.e33) == identity;
    let zero = SurdMatrix::zeros();
    let diag = [&ops.e00, &ops.e11, &ops.e33];
    let algebra = diag.iter().enumerate().all(|(i, p)| {
        diag.iter()
            .enumerate()
            .all(|(j, q)| p.mul(q) == if i == j { (*p).clone() } else { zero.clone() })
    }) && ops.e01.mul(&ops.e10) == ops.e00
        && ops.e10.mul(&ops.e01) == ops.e11;
    let f01_derived = [
        computed[2][2].clone(),
        -(&Surd3::rational(rational(2, 1)) * &computed[1][2]),
        computed[0][2].clone(),
    ];
    let f01_printed = [
        Surd3::zero(),
        Surd3::surd(rational(-1, 18)),
        Surd3::zero(),
    ];
    Ok(BlockStructureReport {
        checks,
        completeness,
        algebra,
        quartet_trace: ops.e33.trace(),
        off_diagonal_symmetric,
        f01_derived,
        f01_printed,
    })
}

/// Mean variance of a block POVM evaluated through the dense operators.
///
/// The doublet block is embedded as
/// `sum_i w_i/2 [(1+n3) 1_00 + (1-n3) 1_11 + (n1 - i n2) 1'_01 + (n1 + i n2) 1'_10]`
/// with `1'_01 = -1_01`, the phase of the triplet-coupled doublet in which
/// the cost takes the form `2 n1 f01` with `f01 = -x/(6 sqrt 3)`. Under the
/// zero-mean constraint this equals [`super::antiparallel_cost`].
pub fn dense_cost(p: &AntiparallelPovm) -> Result<f64> {
    p.validate(INVARIANT_TOL)?;
    let ops = BlockOperators::build()?;
    let c = computed_coefficients(&ops).map(|row| row.map(|s| s.to_f64()));
    // Cost polynomial of block `b` at guess `x`.
    let block = |b: usize, x: f64| c[0][b] * x * x - 2.0 * c[1][b] * x + c[2][b];
    let mut total = block(4, p.q33_guess);
    for o in &p.outcomes {
        let [n1, n2, n3] = o.bloch;
        let x = o.guess;
        // <1'_01> and <1'_10> enter with (n1 -+ i n2); their coefficients
        // are real and equal, so n2 drops out.
        debug_assert!((c[1][2] - c[1][3]).abs() < 1e-15);
        let _ = n2;
        total += 0.5
            * o.weight
            * ((1.0 + n3) * block(0, x) + (1.0 - n3) * block(1, x) - 2.0 * n1 * block(2, x));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antiparallel::{antiparallel_cost, reference_optimum, BlockOutcome};

    #[test]
    fn surd_conversion() {
        let half = SignedSqrtRational::new(1, rational(1, 4)).unwrap();
        assert_eq!(Surd3::from_signed_sqrt(&half).unwrap(), Surd3::rational(rational(1, 2)));
        let third = SignedSqrtRational::new(-1, rational(1, 3)).unwrap();
        assert_eq!(
            Surd3::from_signed_sqrt(&third).unwrap(),
            Surd3::surd(rational(-1, 3))
        );
        let two = SignedSqrtRational::new(1, rational(2, 1)).unwrap();
        assert!(Surd3::from_signed_sqrt(&two).is_err());
        let s = Surd3::new(rational(1, 2), rational(1, 3));
        assert_eq!(&s * &s, Surd3::new(rational(7, 12), rational(1, 3)));
        assert_eq!(Surd3::surd(rational(-1, 36)).to_string(), "-1/36*sqrt(3)");
    }

    #[test]
    fn basis_is_orthonormal() {
        // Exact orthogonality is covered by the projector algebra in the
        // report; cross-block products leave Q(sqrt 3), so check in f64 here.
        let b = BlockBasis::build().unwrap();
        let all: Vec<&[f64; DIM]> = b.singlet.iter().chain(&b.triplet).chain(&b.quartet).collect();
        assert_eq!(all.len(), DIM);
        for (i, u) in all.iter().enumerate() {
            for (j, v) in all.iter().enumerate() {
                let dot: f64 = u.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-15, "<{i}|{j}> = {dot}");
            }
        }
    }

    #[test]
    fn singlet_pair_has_expected_amplitudes() {
        let b = BlockBasisExact::build().unwrap();
        // |S;+1/2> = (|0,1,0> - |1,0,0>)/sqrt 2
        let s = &b.singlet[0];
        assert!((s[0b010].to_f64() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((s[0b100].to_f64() + 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(b.quartet[0][0], SignedSqrtRational::one());
    }

    #[test]
    fn reproduces_every_printed_coefficient() {
        let r = block_structure_check().unwrap();
        assert_eq!(r.checks.len(), 12);
        for c in &r.checks {
            assert!(c.matches(), "I{} {}: {} vs {}", c.moment, c.block, c.computed, c.printed);
        }
        assert!(r.completeness);
        assert!(r.algebra);
        assert!(r.off_diagonal_symmetric);
        assert!(r.passed());
        assert_eq!(r.quartet_trace, Surd3::rational(rational(4, 1)));
        assert_eq!(r.coefficient(1, "q00"), Some(&Surd3::rational(rational(1, 4))));
    }

    #[test]
    fn printed_off_diagonal_cost_is_rephased() {
        let r = block_structure_check().unwrap();
        assert!(!r.f01_consistent());
        // Derived: (2x - 1)/(12 sqrt 3) = -sqrt3/36 + x sqrt3/18.
        assert_eq!(
            r.f01_derived,
            [
                Surd3::surd(rational(-1, 36)),
                Surd3::surd(rational(1, 18)),
                Surd3::zero()
            ]
        );
        // Printed linear term is exactly the negated derived one.
        assert_eq!(r.f01_printed[1], -r.f01_derived[1].clone());
    }

    #[test]
    fn dense_cost_matches_polynomial_cost() {
        let p = reference_optimum();
        let a = antiparallel_cost(&p).unwrap();
        let d = dense_cost(&p).unwrap();
        assert!((a - d).abs() < 1e-15, "{a} vs {d}");
        let p = AntiparallelPovm {
            outcomes: vec![
                BlockOutcome {
                    weight: 0.5,
                    guess: 0.2,
                    bloch: [0.6, 0.3, -0.2],
                },
                BlockOutcome {
                    weight: 1.5,
                    guess: 0.7,
                    bloch: [-0.2, -0.1, 0.2 / 3.0],
                },
            ],
            q33_guess: 0.4,
        };
        let a = antiparallel_cost(&p).unwrap();
        let d = dense_cost(&p).unwrap();
        assert!((a - d).abs() < 1e-15, "{a} vs {d}");
    }
}
