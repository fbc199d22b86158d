//! The orthogonal-pair encoding: optimizer, constraints and block structure.

use std::time::Instant;

use relstate::antiparallel::{
    antiparallel_cost, block_structure_check, optimize_antiparallel, optimize_antiparallel_with,
    OptimizeOptions, INVARIANT_TOL,
};
use relstate::parallel::optimal_variance;
use relstate::Execution;

#[test]
fn two_outcomes_reproduce_the_printed_povm() {
    let start = Instant::now();
    let r = optimize_antiparallel(2, 7, 1e-9).unwrap();
    assert!(start.elapsed().as_secs_f64() < 60.0);
    let p = &r.povm;
    assert_eq!(p.outcomes.len(), 2);
    assert!((p.outcomes[0].guess - 0.644_338).abs() < 1e-5, "{p:?}");
    assert!((p.outcomes[1].guess - 0.355_662).abs() < 1e-5, "{p:?}");
    assert!((p.outcomes[0].guess + p.outcomes[1].guess - 1.0).abs() < 1e-5);
    assert!((p.outcomes[0].bloch[0] - 1.0).abs() < 1e-5);
    assert!((p.outcomes[1].bloch[0] + 1.0).abs() < 1e-5);
    for o in &p.outcomes {
        assert!((o.weight - 1.0).abs() < 1e-5);
    }
    assert_eq!(p.q33_guess, 0.5);
    let parallel = optimal_variance(1, 2).unwrap().value;
    assert!((r.value - parallel).abs() < 1e-6, "{} vs {parallel}", r.value);
    assert!((antiparallel_cost(p).unwrap() - r.value).abs() < 1e-15);
}

#[test]
fn more_outcomes_do_not_improve() {
    let two = optimize_antiparallel(2, 1, 1e-9).unwrap().value;
    for nu in 3..=6 {
        let r = optimize_antiparallel(nu, 1, 1e-9).unwrap();
        assert!(r.value >= two - 1e-9, "nu={nu}: {} < {two}", r.value);
        r.povm.validate(INVARIANT_TOL).unwrap();
        for o in &r.povm.outcomes {
            let norm: f64 = o.bloch.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!(norm <= 1.0);
        }
    }
}

#[test]
fn single_outcome_is_one_twelfth() {
    let r = optimize_antiparallel(1, 99, 1e-9).unwrap();
    assert!((r.value - 1.0 / 12.0).abs() < 1e-12);
}

#[test]
fn result_is_independent_of_scheduling() {
    let seq = OptimizeOptions {
        exec: Execution::Sequential,
        ..OptimizeOptions::default()
    };
    let a = optimize_antiparallel_with(3, 5, 1e-9, &seq).unwrap();
    let b = optimize_antiparallel(3, 5, 1e-9).unwrap();
    assert_eq!(a, b);
}

#[test]
fn block_coefficients_are_reproduced() {
    let r = block_structure_check().unwrap();
    assert!(r.passed(), "{:?}", r.mismatches());
}
