//! One direction encoded by an orthogonal qubit pair `|psi>|psi_perp>`,
//! measured jointly with one copy of a second state.
//!
//! Three qubits decompose as spin 1/2 (twice) plus spin 3/2. Because the
//! doublet appears with multiplicity two, a covariant POVM is only
//! block-diagonal: a 2x2 block `[[q00, q01], [q10, q11]]` on the doublet
//! multiplicity space and a scalar `q33` on the quartet. For finitely many
//! outcomes the 2x2 block is `sum_i w_i delta(x - x_i) (1 + n_i . X) / 2`.
//!
//! The mean variance splits as `Delta = Delta_1 + Delta_3` with
//!
//! * `Delta_3 = 1/9 - h/3 + h^2/3` for quartet guess `h`,
//! * `Delta_1 = 1/2 sum_i w_i [f00 + f11 + 2 n1 f01 + n3 (f00 - f11)](x_i)`,
//!
//! `f00 = 1/6 - x/2 + x^2/2`, `f11 = 1/18 - x/6 + x^2/6`,
//! `f01 = -x / (6 sqrt 3)`.

mod blocks;
mod optimize;

pub use blocks::{
    block_structure_check, dense_cost, BlockBasis, BlockBasisExact, BlockOperators,
    BlockStructureReport, CoefficientCheck, Surd3, SurdMatrix,
};
pub use optimize::{
    optimize_antiparallel, optimize_antiparallel_with, OptimizeOptions, OptimizedPovm,
    DEFAULT_RESTARTS, PRUNE_WEIGHT,
};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::{rational, Error, Result};

/// Tolerance on the completeness and zero-mean constraints.
pub const INVARIANT_TOL: f64 = 1e-12;

const INV_SQRT3: f64 = 0.577_350_269_189_625_7;

/// One outcome of the doublet block: weight `w^2`, guess `x`, Bloch vector `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockOutcome {
    pub weight: f64,
    pub guess: f64,
    pub bloch: [f64; 3],
}

/// A finite-outcome block POVM plus the quartet guess.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntiparallelPovm {
    pub outcomes: Vec<BlockOutcome>,
    pub q33_guess: f64,
}

impl AntiparallelPovm {
    /// Checks `sum w = 2`, `sum w n = 0` (within `tol`), `|n| <= 1`,
    /// nonnegative weights and guesses in `[0, 1]`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.outcomes.is_empty() {
            return Err(Error::Argument("POVM has no doublet outcomes".into()));
        }
        let in_unit = |g: f64| (0.0..=1.0).contains(&g);
        if !in_unit(self.q33_guess) {
            return Err(Error::Argument(format!(
                "quartet guess {} outside [0,1]",
                self.q33_guess
            )));
        }
        let mut total = 0.0;
        let mut mean = [0.0; 3];
        for (i, o) in self.outcomes.iter().enumerate() {
            if o.weight.is_nan() || o.weight < 0.0 {
                return Err(Error::Argument(format!("outcome {i}: negative weight {}", o.weight)));
            }
            if !in_unit(o.guess) {
                return Err(Error::Argument(format!("outcome {i}: guess {} outside [0,1]", o.guess)));
            }
            let norm2: f64 = o.bloch.iter().map(|c| c * c).sum();
            if norm2 > 1.0 + tol {
                return Err(Error::Argument(format!(
                    "outcome {i}: Bloch vector has length {} > 1",
                    norm2.sqrt()
                )));
            }
            total += o.weight;
            for (acc, c) in mean.iter_mut().zip(o.bloch) {
                *acc += o.weight * c;
            }
        }
        if (total - 2.0).abs() > tol {
            return Err(Error::Argument(format!("weights sum to {total}, expected 2")));
        }
        if mean.iter().any(|c| c.abs() > tol) {
            return Err(Error::Argument(format!(
                "weighted Bloch mean {mean:?} is not zero"
            )));
        }
        Ok(())
    }
}

pub fn f00(x: f64) -> f64 {
    1.0 / 6.0 - x / 2.0 + x * x / 2.0
}

pub fn f11(x: f64) -> f64 {
    1.0 / 18.0 - x / 6.0 + x * x / 6.0
}

pub fn f01(x: f64) -> f64 {
    -x * INV_SQRT3 / 6.0
}

/// Cost contributed by one doublet outcome.
pub fn outcome_cost(o: &BlockOutcome) -> f64 {
    let x = o.guess;
    let [n1, _, n3] = o.bloch;
    0.5 * o.weight * (f00(x) + f11(x) + 2.0 * n1 * f01(x) + n3 * (f00(x) - f11(x)))
}

/// `[c0, c1, c2]` of `f00 + f11 + 2 n1 f01 + n3 (f00 - f11)` as a polynomial
/// in the guess; [`outcome_cost`] is `weight / 2` times it.
pub(crate) fn outcome_polynomial(bloch: [f64; 3]) -> [f64; 3] {
    let [n1, _, n3] = bloch;
    [
        (2.0 + n3) / 9.0,
        -(2.0 + n3) / 3.0 - n1 * INV_SQRT3 / 3.0,
        (2.0 + n3) / 3.0,
    ]
}

/// Best guess in `[0, 1]` for an outcome with Bloch vector `bloch`.
pub fn best_guess(bloch: [f64; 3]) -> f64 {
    let [_, c1, c2] = outcome_polynomial(bloch);
    (-c1 / (2.0 * c2)).clamp(0.0, 1.0)
}

pub fn delta1(outcomes: &[BlockOutcome]) -> f64 {
    outcomes.iter().map(outcome_cost).sum()
}

pub fn delta3(h: f64) -> f64 {
    1.0 / 9.0 - h / 3.0 + h * h / 3.0
}

/// Exact [`delta3`]; its minimum over `[0, 1]` is `1/36` at `h = 1/2`.
pub fn delta3_exact(h: &BigRational) -> BigRational {
    rational(1, 9) - h * rational(1, 3) + h * h * rational(1, 3)
}

/// Mean variance of a block POVM.
pub fn antiparallel_cost(p: &AntiparallelPovm) -> Result<f64> {
    p.validate(INVARIANT_TOL)?;
    Ok(delta1(&p.outcomes) + delta3(p.q33_guess))
}

/// The two-outcome optimum in closed form: weights 1, Bloch vectors
/// `(+-1, 0, 0)`, guesses `1/2 +- 1/(4 sqrt 3)`, quartet guess `1/2`.
/// Its cost is exactly `1/24 + 1/36 = 5/72`.
pub fn reference_optimum() -> AntiparallelPovm {
    let shift = INV_SQRT3 / 4.0;
    AntiparallelPovm {
        outcomes: vec![
            BlockOutcome {
                weight: 1.0,
                guess: 0.5 + shift,
                bloch: [1.0, 0.0, 0.0],
            },
            BlockOutcome {
                weight: 1.0,
                guess: 0.5 - shift,
                bloch: [-1.0, 0.0, 0.0],
            },
        ],
        q33_guess: 0.5,
    }
}

/// The two-outcome optimum with guesses rounded to the six printed digits.
pub fn printed_optimum() -> AntiparallelPovm {
    let mut p = reference_optimum();
    p.outcomes[0].guess = 0.644_338;
    p.outcomes[1].guess = 0.355_662;
    p
}

/// `5/72`, the exact value of [`reference_optimum`].
pub fn reference_value() -> BigRational {
    rational(5, 72)
}
