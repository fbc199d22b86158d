//! Minimal variances for the tabulated `(N, M)` cells, exact identities and
//! sum rules.

use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Zero};
use relstate::asymptotic::asymptotic_optimum;
use relstate::parallel::{moments, moments_many, optimal_povm, optimal_variance, IrrepLabel};
use relstate::{format_rational, BigInt, Execution};

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

/// `(N, M, exact, printed mantissa x 10^-2)`.
const CELLS: [(u32, u32, (i64, i64), f64); 7] = [
    (1, 1, (2, 27), 7.41),
    (1, 2, (5, 72), 6.94),
    (2, 2, (1, 16), 6.25),
    (2, 3, (7, 120), 5.83),
    (7, 7, (8, 243), 3.29),
    (20, 20, (7, 484), 1.45),
    (1, 300, (101, 1812), 5.57),
];

fn rounds_to(value: f64, mantissa: f64) -> bool {
    // Half a unit in the last of three significant figures.
    (value * 100.0 - mantissa).abs() <= 0.005
}

#[test]
fn tabulated_cells_round_to_printed_values() {
    let start = Instant::now();
    for (n, m, (p, d), printed) in CELLS {
        let v = optimal_variance(n, m).unwrap();
        assert_eq!(v.exact, q(p, d), "N={n} M={m}: {}", format_rational(&v.exact));
        assert!(rounds_to(v.value, printed), "N={n} M={m}: {}", v.value);
        assert!(!v.clamped);
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn exact_identities() {
    assert_eq!(optimal_variance(1, 1).unwrap().exact, q(2, 27));
    let povm = optimal_povm(1, 1).unwrap();
    assert_eq!(povm.guess(IrrepLabel::new(0)), Some(&q(1, 3)));
    assert_eq!(povm.guess(IrrepLabel::new(2)), Some(&q(5, 9)));
    let (guesses, value) = asymptotic_optimum();
    assert_eq!((guesses.x0, guesses.x1, value), (q(2, 3), q(1, 3), q(1, 18)));
}

#[test]
fn sum_rules_through_twenty() {
    let pairs: Vec<(u32, u32)> = (1..=20).flat_map(|n| (n..=20).map(move |m| (n, m))).collect();
    let all = moments_many(&pairs, Execution::Parallel).unwrap();
    for ((n, m), mo) in pairs.iter().zip(&all) {
        let mut sums = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
        for t in mo.values() {
            sums[0] += &t.i0;
            sums[1] += &t.i1;
            sums[2] += &t.i2;
        }
        assert_eq!(sums, [BigRational::one(), q(1, 2), q(1, 3)], "N={n} M={m}");
    }
}

#[test]
fn parallel_and_sequential_sweeps_agree() {
    let pairs = [(1, 5), (3, 9), (4, 4), (6, 11)];
    assert_eq!(
        moments_many(&pairs, Execution::Sequential).unwrap(),
        moments_many(&pairs, Execution::Parallel).unwrap()
    );
    assert_eq!(moments_many(&pairs, Execution::Sequential).unwrap()[2], moments(4, 4).unwrap());
}

#[test]
fn long_reference_approaches_one_eighteenth() {
    let v = optimal_variance(1, 300).unwrap();
    assert!(v.exact > q(1, 18));
    assert!(v.value - 1.0 / 18.0 < 2e-4);
}
