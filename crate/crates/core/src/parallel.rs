//! Overlap estimation from `N` copies of `|psi1>` and `M >= N` copies of
//! `|psi2>`.
//!
//! The optimal covariant POVM is diagonal in the irreducible blocks of
//! `spin N/2 (x) spin M/2`, labelled here by the qubit count `k` of the
//! spin-`k/2` block, `k = M-N, M-N+2, ..., M+N`. Each block carries three
//! exact moments `I_k^0, I_k^1, I_k^2`; the block's cost for guess `x` is
//! `P_k(x) = I_k^0 x^2 - 2 I_k^1 x + I_k^2`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cg::{cg_squared, factorial};
use crate::{rational_to_f64, Error, Execution, HalfInt, Result};

/// Label `k` of the spin-`k/2` block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IrrepLabel(u32);

impl IrrepLabel {
    pub const fn new(k: u32) -> Self {
        IrrepLabel(k)
    }

    #[inline]
    pub const fn k(self) -> u32 {
        self.0
    }

    pub fn spin(self) -> HalfInt {
        HalfInt::from_twice(self.0 as i32)
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={}", self.0)
    }
}

/// Exact moments of one block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MomentTriple {
    pub i0: BigRational,
    pub i1: BigRational,
    pub i2: BigRational,
}

impl MomentTriple {
    /// Coefficients `[c0, c1, c2]` of `P(x) = c0 + c1 x + c2 x^2`.
    pub fn polynomial(&self) -> [BigRational; 3] {
        [
            self.i2.clone(),
            -(&self.i1 * BigInt::from(2)),
            self.i0.clone(),
        ]
    }

    /// `P(x)` for an exact guess.
    pub fn cost_at(&self, x: &BigRational) -> BigRational {
        &self.i2 - &self.i1 * x * BigInt::from(2) + &self.i0 * x * x
    }

    /// Unconstrained minimizer `I^1 / I^0`.
    pub fn vertex(&self) -> BigRational {
        &self.i1 / &self.i0
    }

    /// Minimizer of `P` over `[0, 1]`.
    pub fn guess(&self) -> BigRational {
        clamp_unit(self.vertex())
    }

    /// `min_{0<=x<=1} P(x)`.
    pub fn minimal_cost(&self) -> BigRational {
        self.cost_at(&self.guess())
    }
}

pub(crate) fn clamp_unit(x: BigRational) -> BigRational {
    if x.is_negative() {
        BigRational::zero()
    } else if x > BigRational::one() {
        BigRational::one()
    } else {
        x
    }
}

fn check_counts(n: u32, m: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("N must be at least 1".into()));
    }
    if n > m {
        return Err(Error::Argument(format!(
            "expected N <= M, got N={n}, M={m}; order the inputs"
        )));
    }
    Ok(())
}

/// Admissible block labels `M-N, M-N+2, ..., M+N`.
pub fn labels(n: u32, m: u32) -> Result<Vec<IrrepLabel>> {
    check_counts(n, m)?;
    Ok((m - n..=m + n).step_by(2).map(IrrepLabel).collect())
}

/// Exact moments of every block.
///
/// `I_k^0 = (k+1)/((N+1)(M+1))`. `I_k^1` and `I_k^2` are sums over the
/// block's projections of products of squared Clebsch-Gordan coefficients:
/// the first couples `|N/2,N/2>` with `|M/2,mu>` into `|k/2, N/2+mu>`, the
/// second lifts `|M/2,mu>` by one (resp. two) stretched spin-up qubits.
pub fn moments(n: u32, m: u32) -> Result<BTreeMap<IrrepLabel, MomentTriple>> {
    check_counts(n, m)?;
    let (tn, tm) = (n as i32, m as i32);
    let half_n = HalfInt::from_twice(tn);
    let half_m = HalfInt::from_twice(tm);
    let mut out = BTreeMap::new();
    for label in labels(n, m)? {
        let spin = label.spin();
        let i0 = BigRational::new(
            BigInt::from(label.k() + 1),
            BigInt::from((n + 1) as u64 * (m + 1) as u64),
        );
        let mut s1 = BigRational::zero();
        let mut s2 = BigRational::zero();
        for mu in half_m.projections() {
            let proj = half_n + mu;
            if proj.twice().abs() > spin.twice() {
                continue;
            }
            let coupling = cg_squared(half_n, half_n, half_m, mu, spin, proj)?;
            if coupling.is_zero() {
                continue;
            }
            let lift1 = cg_squared(
                half_m,
                mu,
                HalfInt::HALF,
                HalfInt::HALF,
                HalfInt::from_twice(tm + 1),
                mu + HalfInt::HALF,
            )?;
            let lift2 = cg_squared(
                half_m,
                mu,
                HalfInt::ONE,
                HalfInt::ONE,
                HalfInt::from_twice(tm + 2),
                mu + HalfInt::ONE,
            )?;
            s1 += &coupling * lift1;
            s2 += coupling * lift2;
        }
        let i1 = s1 / BigInt::from(m + 2);
        let i2 = s2 / BigInt::from(m + 3);
        out.insert(label, MomentTriple { i0, i1, i2 });
    }
    Ok(out)
}

/// [`moments`] for many `(N, M)` pairs, in input order.
pub fn moments_many(
    pairs: &[(u32, u32)],
    exec: Execution,
) -> Result<Vec<BTreeMap<IrrepLabel, MomentTriple>>> {
    exec.map(pairs.to_vec(), |(n, m)| moments(n, m))
        .into_iter()
        .collect()
}

/// The optimal diagonal POVM: one guess per block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PovmSpec {
    pub entries: Vec<(IrrepLabel, BigRational)>,
}

impl PovmSpec {
    pub fn guess(&self, label: IrrepLabel) -> Option<&BigRational> {
        self.entries
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, g)| g)
    }
}

pub fn optimal_povm(n: u32, m: u32) -> Result<PovmSpec> {
    Ok(povm_from_moments(&moments(n, m)?))
}

pub fn povm_from_moments(moments: &BTreeMap<IrrepLabel, MomentTriple>) -> PovmSpec {
    PovmSpec {
        entries: moments.iter().map(|(l, t)| (*l, t.guess())).collect(),
    }
}

/// Minimal mean variance, exact and rounded.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalVariance {
    pub exact: BigRational,
    pub value: f64,
    /// True when some block's unconstrained minimizer left `[0, 1]`.
    pub clamped: bool,
}

pub fn optimal_variance(n: u32, m: u32) -> Result<OptimalVariance> {
    Ok(variance_from_moments(&moments(n, m)?))
}

pub fn variance_from_moments(moments: &BTreeMap<IrrepLabel, MomentTriple>) -> OptimalVariance {
    let mut exact = BigRational::zero();
    let mut clamped = false;
    for t in moments.values() {
        let vertex = t.vertex();
        if vertex.is_negative() || vertex > BigRational::one() {
            clamped = true;
            exact += t.minimal_cost();
        } else {
            exact += &t.i2 - &t.i1 * &t.i1 / &t.i0;
        }
    }
    let value = rational_to_f64(&exact);
    OptimalVariance {
        exact,
        value,
        clamped,
    }
}

/// Exact monomial coefficients of `p_k(x)`, the probability of landing in
/// block `k` when the single-copy overlap is `x` (`coeffs[i]` multiplies `x^i`).
pub fn outcome_polynomials(n: u32, m: u32) -> Result<BTreeMap<IrrepLabel, Vec<BigRational>>> {
    check_counts(n, m)?;
    let half_n = HalfInt::from_twice(n as i32);
    let half_m = HalfInt::from_twice(m as i32);
    let big_m = m as usize;
    let mut out = BTreeMap::new();
    for label in labels(n, m)? {
        let mut coeffs = vec![BigRational::zero(); big_m + 1];
        for mu in half_m.projections() {
            let proj = half_n + mu;
            if proj.twice().abs() > label.spin().twice() {
                continue;
            }
            let c2 = cg_squared(half_n, half_n, half_m, mu, label.spin(), proj)?;
            if c2.is_zero() {
                continue;
            }
            // binomial(M, a) x^a (1-x)^(M-a), a = number of up spins.
            let a = ((half_m + mu).twice() / 2) as usize;
            let binom = num_integer::binomial(BigInt::from(big_m), BigInt::from(a));
            for j in 0..=(big_m - a) {
                let term = num_integer::binomial(BigInt::from(big_m - a), BigInt::from(j));
                let signed = if j % 2 == 0 { term } else { -term };
                coeffs[a + j] += &c2 * BigRational::from_integer(&binom * signed);
            }
        }
        out.insert(label, coeffs);
    }
    Ok(out)
}

/// `int_0^1 x^alpha p(x) dx` for a polynomial in monomial coefficients.
pub fn integrate_polynomial(coeffs: &[BigRational], alpha: u32) -> BigRational {
    coeffs
        .iter()
        .enumerate()
        .fold(BigRational::zero(), |acc, (i, c)| {
            acc + c / BigInt::from(i as u64 + u64::from(alpha) + 1)
        })
}

/// Evaluates a polynomial at an exact point.
pub fn eval_polynomial(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    coeffs
        .iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Precomputed double-precision forward model for repeated evaluation of
/// block probabilities, used by the simulator.
#[derive(Clone, Debug)]
pub struct OutcomeModel {
    n: u32,
    m: u32,
    labels: Vec<IrrepLabel>,
    guesses: Vec<f64>,
    /// `coupling[l * (M+1) + a]` = squared CG of block `l` at `a` up spins.
    coupling: Vec<f64>,
    ln_binom: Vec<f64>,
}

impl OutcomeModel {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        let mo = moments(n, m)?;
        let povm = povm_from_moments(&mo);
        let labels: Vec<IrrepLabel> = mo.keys().copied().collect();
        let half_n = HalfInt::from_twice(n as i32);
        let half_m = HalfInt::from_twice(m as i32);
        let width = m as usize + 1;
        let mut coupling = vec![0.0; labels.len() * width];
        for (li, label) in labels.iter().enumerate() {
            for mu in half_m.projections() {
                let proj = half_n + mu;
                if proj.twice().abs() > label.spin().twice() {
                    continue;
                }
                let a = ((half_m + mu).twice() / 2) as usize;
                let c2 = cg_squared(half_n, half_n, half_m, mu, label.spin(), proj)?;
                coupling[li * width + a] = rational_to_f64(&c2);
            }
        }
        let ln_fact: Vec<f64> = (0..=m as usize)
            .map(ln_factorial)
            .collect();
        let ln_binom = (0..=m as usize)
            .map(|a| ln_fact[m as usize] - ln_fact[a] - ln_fact[m as usize - a])
            .collect();
        let guesses = povm.entries.iter().map(|(_, g)| rational_to_f64(g)).collect();
        Ok(Self {
            n,
            m,
            labels,
            guesses,
            coupling,
            ln_binom,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn labels(&self) -> &[IrrepLabel] {
        &self.labels
    }

    /// Optimal guess per block, aligned with [`labels`](Self::labels).
    pub fn guesses(&self) -> &[f64] {
        &self.guesses
    }

    /// Writes `p_k(x)` for every block into `out` (aligned with labels).
    /// `weights` is scratch space of length `M + 1`.
    pub fn distribution_into(&self, x: f64, weights: &mut Vec<f64>, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.labels.len());
        let m = self.m as usize;
        weights.clear();
        if x <= 0.0 {
            weights.extend((0..=m).map(|a| if a == 0 { 1.0 } else { 0.0 }));
        } else if x >= 1.0 {
            weights.extend((0..=m).map(|a| if a == m { 1.0 } else { 0.0 }));
        } else {
            let (lx, ly) = (x.ln(), (-x).ln_1p());
            weights.extend(
                (0..=m).map(|a| (self.ln_binom[a] + a as f64 * lx + (m - a) as f64 * ly).exp()),
            );
        }
        let width = m + 1;
        for (li, slot) in out.iter_mut().enumerate() {
            let row = &self.coupling[li * width..(li + 1) * width];
            *slot = row.iter().zip(weights.iter()).map(|(c, w)| c * w).sum();
        }
    }

    pub fn distribution(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.labels.len()];
        self.distribution_into(x, &mut Vec::with_capacity(self.m as usize + 1), &mut out);
        out
    }
}

fn ln_factorial(n: usize) -> f64 {
    if n < 171 {
        // Exact enough through f64 directly.
        (1..=n).map(|i| (i as f64).ln()).sum()
    } else {
        let f = factorial(n);
        let bits = f.bits();
        let shift = bits.saturating_sub(64);
        let top = num_traits::ToPrimitive::to_f64(&(f >> shift)).unwrap_or(f64::MAX);
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Block probabilities for overlap `x` in `[0, 1]`.
pub fn outcome_distribution(n: u32, m: u32, x: f64) -> Result<BTreeMap<IrrepLabel, f64>> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Argument(format!("overlap {x} outside [0,1]")));
    }
    let model = OutcomeModel::new(n, m)?;
    Ok(model
        .labels()
        .iter()
        .copied()
        .zip(model.distribution(x))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational;
    use proptest::prelude::*;

    fn triple(t: &MomentTriple) -> (BigRational, BigRational, BigRational) {
        (t.i0.clone(), t.i1.clone(), t.i2.clone())
    }

    #[test]
    fn moments_one_one() {
        let mo = moments(1, 1).unwrap();
        assert_eq!(mo.len(), 2);
        assert_eq!(
            triple(&mo[&IrrepLabel(0)]),
            (rational(1, 4), rational(1, 12), rational(1, 24))
        );
        assert_eq!(
            triple(&mo[&IrrepLabel(2)]),
            (rational(3, 4), rational(5, 12), rational(7, 24))
        );
    }

    #[test]
    fn rejects_unordered_counts() {
        assert!(matches!(moments(2, 1), Err(Error::Argument(_))));
        assert!(matches!(moments(0, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn optimal_povm_small_cases() {
        let p = optimal_povm(1, 1).unwrap();
        assert_eq!(p.guess(IrrepLabel(0)), Some(&rational(1, 3)));
        assert_eq!(p.guess(IrrepLabel(2)), Some(&rational(5, 9)));
        // Frozen from the dense Casimir-projector oracle (dense::trace_moments).
        let p = optimal_povm(2, 2).unwrap();
        assert_eq!(p.guess(IrrepLabel(0)), Some(&rational(1, 4)));
        assert_eq!(p.guess(IrrepLabel(2)), Some(&rational(3, 8)));
        assert_eq!(p.guess(IrrepLabel(4)), Some(&rational(5, 8)));
    }

    #[test]
    fn variance_one_one_is_two_27ths() {
        let v = optimal_variance(1, 1).unwrap();
        assert_eq!(v.exact, rational(2, 27));
        assert!(!v.clamped);
        assert!((v.value - 0.074_074_074_074_074_07).abs() < 1e-16);
    }

    #[test]
    fn outcome_distribution_one_one_matches_singlet_triplet() {
        for x in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let p = outcome_distribution(1, 1, x).unwrap();
            assert!((p[&IrrepLabel(0)] - (1.0 - x) / 2.0).abs() < 1e-15);
            assert!((p[&IrrepLabel(2)] - (1.0 + x) / 2.0).abs() < 1e-15);
        }
        let p = outcome_distribution(1, 1, 1.0).unwrap();
        assert_eq!(p[&IrrepLabel(0)], 0.0);
        assert_eq!(p[&IrrepLabel(2)], 1.0);
        assert!(outcome_distribution(1, 1, -0.1).is_err());
    }

    #[test]
    fn outcome_polynomials_integrate_to_moments() {
        for (n, m) in [(1, 1), (1, 2), (2, 3), (3, 5), (4, 4)] {
            let mo = moments(n, m).unwrap();
            let polys = outcome_polynomials(n, m).unwrap();
            for (label, t) in &mo {
                let p = &polys[label];
                assert_eq!(integrate_polynomial(p, 0), t.i0, "N={n} M={m} {label}");
                assert_eq!(integrate_polynomial(p, 1), t.i1, "N={n} M={m} {label}");
                assert_eq!(integrate_polynomial(p, 2), t.i2, "N={n} M={m} {label}");
            }
        }
    }

    #[test]
    fn model_matches_exact_polynomials() {
        let polys = outcome_polynomials(3, 7).unwrap();
        let model = OutcomeModel::new(3, 7).unwrap();
        for p in 0..=10 {
            let x = rational(p, 10);
            let approx = model.distribution(p as f64 / 10.0);
            for (li, label) in model.labels().iter().enumerate() {
                let exact = rational_to_f64(&eval_polynomial(&polys[label], &x));
                assert!((approx[li] - exact).abs() < 1e-13, "{label} x={p}/10");
            }
        }
    }

    #[test]
    fn model_is_accurate_for_long_reference() {
        let model = OutcomeModel::new(1, 300).unwrap();
        for x in [1e-9, 0.01, 0.3, 0.77, 0.999_999] {
            let total: f64 = model.distribution(x).iter().sum();
            assert!((total - 1.0).abs() < 1e-10, "x={x} total={total}");
        }
    }

    #[test]
    fn monotone_over_table_grid() {
        let grid = [(1, 1), (1, 2), (2, 2), (2, 3), (3, 3), (7, 7), (20, 20)];
        let values: Vec<BigRational> = grid
            .iter()
            .map(|&(n, m)| optimal_variance(n, m).unwrap().exact)
            .collect();
        // Increasing either argument lowers the variance.
        assert!(values[1] < values[0]);
        assert!(values[2] < values[1]);
        assert!(values[3] < values[2]);
        assert!(values[4] < values[3]);
        assert!(values[5] < values[4]);
        assert!(values[6] < values[5]);
        for n in 1..6 {
            for m in n..8 {
                let here = optimal_variance(n, m).unwrap().exact;
                assert!(optimal_variance(n, m + 1).unwrap().exact < here);
                if n < m {
                    assert!(optimal_variance(n + 1, m).unwrap().exact < here);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn completeness_exact(n in 1u32..5, extra in 0u32..5, p in 0i64..=20) {
            let m = n + extra;
            let polys = outcome_polynomials(n, m).unwrap();
            let x = rational(p, 20);
            let total = polys
                .values()
                .map(|c| eval_polynomial(c, &x))
                .fold(BigRational::zero(), |a, b| a + b);
            prop_assert_eq!(total, BigRational::one());
        }

        #[test]
        fn moment_triples_are_ordered(n in 1u32..6, extra in 0u32..6) {
            let m = n + extra;
            for t in moments(n, m).unwrap().values() {
                prop_assert!(!t.i2.is_negative());
                prop_assert!(t.i2 <= t.i1);
                prop_assert!(t.i1 <= t.i0);
                prop_assert!(t.i0 <= BigRational::one());
            }
        }
    }
}
