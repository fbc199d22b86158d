//! Exact dense-matrix machinery for brute-force oracles.
//!
//! Everything here works in the computational basis of a few qudits, with
//! matrices stored as integer numerators over one shared denominator. The
//! routines are deliberately independent of the Clebsch-Gordan kernel:
//! projectors come from literal permutation averages and from polynomials
//! in the total-spin Casimir operator.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::parallel::{IrrepLabel, MomentTriple};
use crate::{Error, Result};

/// Square matrix `num / den` with integer entries and a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledMatrix {
    dim: usize,
    num: Vec<i128>,
    den: i128,
}

impl ScaledMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            num: vec![0; dim * dim],
            den: 1,
        }
    }

    /// Builds `entries / den` from row-major integer numerators.
    pub fn from_parts(dim: usize, entries: Vec<i128>, den: i128) -> Self {
        assert_eq!(entries.len(), dim * dim, "entry count does not match dimension");
        assert!(den != 0, "zero denominator");
        Self {
            dim,
            num: entries,
            den: 1,
        }
        .div_scalar(den)
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.num[i * dim + i] = 1;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Raw integer numerator of entry `(row, col)`.
    #[inline]
    pub fn numer_at(&self, row: usize, col: usize) -> i128 {
        self.num[row * self.dim + col]
    }

    #[inline]
    pub fn denom(&self) -> i128 {
        self.den
    }

    pub fn entry(&self, row: usize, col: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.numer_at(row, col)),
            BigInt::from(self.den),
        )
    }

    pub fn trace(&self) -> BigRational {
        let t: i128 = (0..self.dim).map(|i| self.numer_at(i, i)).sum();
        BigRational::new(BigInt::from(t), BigInt::from(self.den))
    }

    fn add_numer(&mut self, row: usize, col: usize, v: i128) {
        self.num[row * self.dim + col] += v;
    }

    fn reduce(mut self) -> Self {
        let g = self
            .num
            .iter()
            .fold(self.den, |acc, &v| acc.gcd(&v))
            .abs();
        if g > 1 {
            self.num.iter_mut().for_each(|v| *v /= g);
            self.den /= g;
        }
        self
    }

    /// Divides every entry by `scalar` (nonzero).
    pub fn div_scalar(mut self, scalar: i128) -> Self {
        assert!(scalar != 0, "division by zero");
        if scalar < 0 {
            self.num.iter_mut().for_each(|v| *v = -*v);
        }
        self.den *= scalar.abs();
        self.reduce()
    }

    /// `self - c * 1` for an integer `c`.
    pub fn sub_identity(mut self, c: i128) -> Self {
        for i in 0..self.dim {
            self.num[i * self.dim + i] -= c * self.den;
        }
        self.reduce()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let den = self.den.lcm(&other.den);
        let (a, b) = (den / self.den, den / other.den);
        Self {
            dim: self.dim,
            num: self
                .num
                .iter()
                .zip(&other.num)
                .map(|(x, y)| x * a + y * b)
                .collect(),
            den,
        }
        .reduce()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = vec![0i128; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.num[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.num[k * n + j];
                }
            }
        }
        Self {
            dim: n,
            num: out,
            den: self.den * other.den,
        }
        .reduce()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        let mut num = vec![0i128; dim * dim];
        for i in 0..n {
            for j in 0..n {
                let a = self.num[i * n + j];
                if a == 0 {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        num[(i * m + k) * dim + j * m + l] = a * other.num[k * m + l];
                    }
                }
            }
        }
        Self {
            dim,
            num,
            den: self.den * other.den,
        }
        .reduce()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }
}

/// Digits of `index` in base `d`, most significant site first.
pub fn digits(mut index: usize, d: usize, sites: usize) -> Vec<usize> {
    let mut out = vec![0; sites];
    for slot in out.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn index_of(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// The operator sending `|i_1 ... i_n>` to `|i_perm[0] ... i_perm[n-1]>`.
pub fn permutation_operator(d: usize, sites: usize, perm: &[usize]) -> ScaledMatrix {
    let dim = d.pow(sites as u32);
    let mut m = ScaledMatrix::zeros(dim);
    for col in 0..dim {
        let from = digits(col, d, sites);
        let to: Vec<usize> = perm.iter().map(|&p| from[p]).collect();
        m.add_numer(index_of(&to, d), col, 1);
    }
    m
}

/// Projector onto the symmetric subspace of `sites` qudits, built as the
/// average of all permutation operators.
pub fn symmetrizer(d: usize, sites: usize) -> ScaledMatrix {
    let perms = permutations(sites);
    let count = perms.len() as i128;
    let dim = d.pow(sites as u32);
    let mut acc = ScaledMatrix::zeros(dim);
    for p in &perms {
        let op = permutation_operator(d, sites, p);
        for (a, b) in acc.num.iter_mut().zip(&op.num) {
            *a += b;
        }
    }
    acc.div_scalar(count)
}

/// One entry of the symmetrizer, evaluated by counting permutations, for
/// spaces too large to materialize.
pub fn symmetrizer_entry(d: usize, sites: usize, row: usize, col: usize) -> BigRational {
    let perms = permutations(sites);
    let from = digits(col, d, sites);
    let target = digits(row, d, sites);
    let hits = perms
        .iter()
        .filter(|p| p.iter().zip(&target).all(|(&pi, &t)| from[pi] == t))
        .count();
    BigRational::new(BigInt::from(hits), BigInt::from(perms.len()))
}

/// `4 S^2` for `qubits` spin-1/2 sites, an integer matrix.
///
/// Uses `4 S^2 = sum_{i,j} 4 s_i . s_j` with `4 s_i . s_i = 3` and
/// `4 s_i . s_j = 2 SWAP_ij - 1` for `i != j`.
pub fn casimir_times_four(qubits: usize) -> ScaledMatrix {
    let dim = 1usize << qubits;
    let mut m = ScaledMatrix::zeros(dim);
    for col in 0..dim {
        let bits = digits(col, 2, qubits);
        for i in 0..qubits {
            for j in 0..qubits {
                if i == j {
                    m.add_numer(col, col, 3);
                    continue;
                }
                m.add_numer(col, col, -1);
                let mut swapped = bits.clone();
                swapped.swap(i, j);
                m.add_numer(index_of(&swapped, 2), col, 2);
            }
        }
    }
    m
}

/// Projector onto total spin `two_j / 2` on `qubits` qubits, as the
/// Lagrange-interpolation polynomial in the Casimir operator.
pub fn spin_projector(qubits: usize, two_j: usize) -> Result<ScaledMatrix> {
    if two_j > qubits || !(qubits - two_j).is_multiple_of(2) {
        return Err(Error::Argument(format!(
            "spin {two_j}/2 does not occur on {qubits} qubits"
        )));
    }
    let casimir = casimir_times_four(qubits);
    // Eigenvalue of 4 S^2 on spin k/2 is k (k + 2).
    let eig = |k: usize| (k * (k + 2)) as i128;
    let mut proj = ScaledMatrix::identity(1 << qubits);
    for other in (qubits % 2..=qubits).step_by(2).filter(|&k| k != two_j) {
        let factor = casimir
            .clone()
            .sub_identity(eig(other))
            .div_scalar(eig(two_j) - eig(other));
        proj = proj.mul(&factor);
    }
    Ok(proj)
}

/// The (row, col, weight) triples that turn a block operator into the
/// moment `tr[(B (x) P0^alpha)(|p><p| (x) S_{m+alpha})] / dim S_{m+alpha}`.
///
/// `B` acts on `prefix.len() + m` sites; `|p>` is the computational state
/// `prefix` on its leading sites and `P0` projects one site onto `|0>`.
/// This is the Haar integral `E_psi[<p,psi^m| B |p,psi^m> |<0|psi>|^(2 alpha)]`.
pub fn reference_weights(
    d: usize,
    prefix: &[usize],
    m: usize,
    alpha: usize,
) -> Vec<(usize, usize, BigRational)> {
    let sites = m + alpha;
    let dim_sym = crate::cg::sym_dim(d as u64, sites as u64).expect("d >= 1");
    let norm = BigRational::from_integer(BigInt::from(dim_sym));
    let block_sites = prefix.len() + m;
    let sub = d.pow(m as u32);
    let mut out = Vec::new();
    for a in 0..sub {
        for b in 0..sub {
            let a_digits = digits(a, d, m);
            let b_digits = digits(b, d, m);
            let mut sym_row = b_digits.clone();
            sym_row.extend(std::iter::repeat_n(0, alpha));
            let mut sym_col = a_digits.clone();
            sym_col.extend(std::iter::repeat_n(0, alpha));
            let s = symmetrizer_entry(d, sites, index_of(&sym_row, d), index_of(&sym_col, d));
            if s.is_zero() {
                continue;
            }
            let mut row = prefix.to_vec();
            row.extend(&a_digits);
            let mut col = prefix.to_vec();
            col.extend(&b_digits);
            debug_assert_eq!(row.len(), block_sites);
            out.push((index_of(&row, d), index_of(&col, d), s / &norm));
        }
    }
    out
}

/// Evaluates `sum weight * B[row, col]` for a rational block operator.
pub fn apply_weights(block: &ScaledMatrix, weights: &[(usize, usize, BigRational)]) -> BigRational {
    weights
        .iter()
        .fold(BigRational::zero(), |acc, (r, c, w)| acc + block.entry(*r, *c) * w)
}

/// Brute-force moments `I_k^0, I_k^1, I_k^2` for `n` copies of one state and
/// `m` copies of the other, from explicit projectors on `n + m` qubits.
///
/// Capped at `n + m <= 6` (64-dimensional operators).
pub fn trace_moments(n: u32, m: u32) -> Result<BTreeMap<IrrepLabel, MomentTriple>> {
    if n == 0 || n > m {
        return Err(Error::Argument(format!("need 1 <= N <= M, got N={n}, M={m}")));
    }
    if n + m > 6 {
        return Err(Error::Argument(format!(
            "dense oracle limited to N+M <= 6, got {}",
            n + m
        )));
    }
    let (n, m) = (n as usize, m as usize);
    let sym_pair = symmetrizer(2, n).kron(&symmetrizer(2, m));
    let prefix = vec![0usize; n];
    let weights: Vec<_> = (0..3).map(|alpha| reference_weights(2, &prefix, m, alpha)).collect();
    let mut out = BTreeMap::new();
    for k in (m - n..=m + n).step_by(2) {
        let block = sym_pair.mul(&spin_projector(n + m, k)?);
        let [i0, i1, i2] = [0, 1, 2].map(|alpha| apply_weights(&block, &weights[alpha]));
        out.insert(IrrepLabel::new(k as u32), MomentTriple { i0, i1, i2 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational;

    #[test]
    fn symmetrizer_is_projector_with_binomial_trace() {
        for (d, sites) in [(2, 1), (2, 2), (2, 3), (3, 2), (3, 3), (4, 2)] {
            let s = symmetrizer(d, sites);
            assert_eq!(s.mul(&s), s);
            let expected = crate::cg::sym_dim(d as u64, sites as u64).unwrap();
            assert_eq!(s.trace(), BigRational::from_integer(BigInt::from(expected)));
        }
    }

    #[test]
    fn symmetrizer_entry_agrees_with_matrix() {
        let s = symmetrizer(3, 3);
        for row in 0..27 {
            for col in 0..27 {
                assert_eq!(symmetrizer_entry(3, 3, row, col), s.entry(row, col));
            }
        }
    }

    #[test]
    fn spin_projectors_resolve_identity() {
        for q in 1..=5 {
            let mut total = ScaledMatrix::zeros(1 << q);
            for k in (q % 2..=q).step_by(2) {
                let p = spin_projector(q, k).unwrap();
                assert_eq!(p.mul(&p), p, "idempotent q={q} k={k}");
                // Multiplicity times dimension.
                let trace = p.trace();
                assert!(trace > BigRational::zero());
                total = total.add(&p);
            }
            assert!(total.is_identity());
        }
        // Two qubits: singlet has trace 1, triplet 3.
        assert_eq!(spin_projector(2, 0).unwrap().trace(), rational(1, 1));
        assert_eq!(spin_projector(2, 2).unwrap().trace(), rational(3, 1));
        assert!(spin_projector(3, 0).is_err());
    }

    #[test]
    fn trace_moments_one_one() {
        let mo = trace_moments(1, 1).unwrap();
        let singlet = &mo[&IrrepLabel::new(0)];
        let triplet = &mo[&IrrepLabel::new(2)];
        assert_eq!(
            (singlet.i0.clone(), singlet.i1.clone(), singlet.i2.clone()),
            (rational(1, 4), rational(1, 12), rational(1, 24))
        );
        assert_eq!(
            (triplet.i0.clone(), triplet.i1.clone(), triplet.i2.clone()),
            (rational(3, 4), rational(5, 12), rational(7, 24))
        );
    }

    #[test]
    fn trace_moments_rejects_large_spaces() {
        assert!(trace_moments(3, 4).is_err());
        assert!(trace_moments(2, 1).is_err());
    }
}
