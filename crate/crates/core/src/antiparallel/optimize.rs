//! Multi-start Nelder-Mead search for the doublet-block POVM.
//!
//! For `nu` outcomes the search runs over `nu` weight logits and `nu` raw
//! Bloch vectors. The constraints hold by construction at every point:
//!
//! * weights are `2 softmax(logits)`, so `sum w = 2`;
//! * each raw vector is radially clamped into the unit ball, the weighted
//!   mean is subtracted, and if that pushed any vector outside the ball all
//!   vectors are scaled by the same factor, which keeps the mean at zero.
//!
//! Guesses are not searched over: for fixed `(w, n)` each outcome's cost is a
//! convex quadratic in its guess, minimized at a clamped vertex. The quartet
//! guess is fixed at its optimum `1/2`.

use serde::{Deserialize, Serialize};

use super::{antiparallel_cost, best_guess, delta3, outcome_polynomial, AntiparallelPovm, BlockOutcome};
use crate::rng::{derive_seed, ShotStream};
use crate::{Error, Execution, Result};

pub const DEFAULT_RESTARTS: usize = 32;

/// Weights below this are dropped from the reported POVM.
pub const PRUNE_WEIGHT: f64 = 1e-8;

/// Search budget and scheduling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub restarts: usize,
    /// Objective evaluations allowed per restart.
    pub max_evaluations: usize,
    pub exec: Execution,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            max_evaluations: 400_000,
            exec: Execution::Parallel,
        }
    }
}

/// Best POVM found, with restart bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizedPovm {
    pub povm: AntiparallelPovm,
    pub value: f64,
    pub restarts: usize,
    /// Restarts whose simplex collapsed within the budget.
    pub converged_restarts: usize,
    /// Restarts that ended within `tol` of the best value.
    pub agreeing_restarts: usize,
    /// Index of the restart that produced the result.
    pub best_restart: usize,
}

fn softmax_weights(logits: &[f64]) -> Vec<f64> {
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| 2.0 * e / total).collect()
}

fn norm(v: &[f64; 3]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Enforces `sum w n = 0` and `|n| <= 1` for weights summing to 2.
pub(crate) fn project_bloch(weights: &[f64], bloch: &mut [[f64; 3]]) {
    for n in bloch.iter_mut() {
        let r = norm(n);
        if r > 1.0 {
            n.iter_mut().for_each(|c| *c /= r);
        }
    }
    let total: f64 = weights.iter().sum();
    let mut mean = [0.0; 3];
    for (w, n) in weights.iter().zip(bloch.iter()) {
        for (m, c) in mean.iter_mut().zip(n) {
            *m += w * c / total;
        }
    }
    for n in bloch.iter_mut() {
        for (c, m) in n.iter_mut().zip(mean) {
            *c -= m;
        }
    }
    let largest = bloch.iter().map(norm).fold(0.0, f64::max);
    if largest > 1.0 {
        for n in bloch.iter_mut() {
            n.iter_mut().for_each(|c| *c /= largest);
        }
    }
}

fn decode(params: &[f64], nu: usize) -> (Vec<f64>, Vec<[f64; 3]>) {
    let weights = softmax_weights(&params[..nu]);
    let mut bloch: Vec<[f64; 3]> = (0..nu)
        .map(|i| {
            let r = &params[nu + 3 * i..nu + 3 * i + 3];
            [r[0], r[1], r[2]]
        })
        .collect();
    project_bloch(&weights, &mut bloch);
    (weights, bloch)
}

fn profiled_cost(weights: &[f64], bloch: &[[f64; 3]]) -> f64 {
    let doublet: f64 = weights
        .iter()
        .zip(bloch)
        .map(|(w, n)| {
            let [c0, c1, c2] = outcome_polynomial(*n);
            let x = best_guess(*n);
            0.5 * w * (c0 + c1 * x + c2 * x * x)
        })
        .sum();
    doublet + delta3(0.5)
}

struct Simplex {
    point: Vec<f64>,
    value: f64,
    converged: bool,
    evaluations: usize,
}

/// Plain Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Stops when the spread of simplex values drops below `ftol`.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    step: f64,
    ftol: f64,
    max_evaluations: usize,
) -> Simplex {
    let dim = start.len();
    let mut verts: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += step;
        verts.push(v);
    }
    let mut vals: Vec<f64> = verts.iter().map(|v| f(v)).collect();
    let mut evaluations = vals.len();
    let mut converged = false;
    while evaluations < max_evaluations {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        verts = order.iter().map(|&i| verts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if vals[dim] - vals[0] <= ftol {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| verts[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&verts[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        evaluations += 1;
        if fr < vals[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            evaluations += 1;
            if fe < fr {
                verts[dim] = expanded;
                vals[dim] = fe;
            } else {
                verts[dim] = reflected;
                vals[dim] = fr;
            }
        } else if fr < vals[dim - 1] {
            verts[dim] = reflected;
            vals[dim] = fr;
        } else {
            let (candidate, fc) = if fr < vals[dim] {
                let c = along(-0.5);
                let v = f(&c);
                (c, v)
            } else {
                let c = along(0.5);
                let v = f(&c);
                (c, v)
            };
            evaluations += 1;
            if fc < vals[dim].min(fr) {
                verts[dim] = candidate;
                vals[dim] = fc;
            } else {
                let best = verts[0].clone();
                for i in 1..=dim {
                    for (x, b) in verts[i].iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    vals[i] = f(&verts[i]);
                }
                evaluations += dim;
            }
        }
    }
    let best = (0..=dim)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)))
        .unwrap_or(0);
    Simplex {
        point: verts[best].clone(),
        value: vals[best],
        converged,
        evaluations,
    }
}

struct RestartResult {
    params: Vec<f64>,
    value: f64,
    converged: bool,
}

fn run_restart(nu: usize, seed: u64, index: usize, tol: f64, budget: usize) -> RestartResult {
    let mut stream = ShotStream::new(derive_seed(seed, index as u64));
    let mut params: Vec<f64> = (0..4 * nu).map(|_| 2.0 * stream.uniform() - 1.0).collect();
    let objective = |p: &[f64]| {
        let (w, n) = decode(p, nu);
        profiled_cost(&w, &n)
    };
    let ftol = tol * 1e-3;
    let mut value = objective(&params);
    let mut used = 0;
    let mut converged = false;
    let mut step = 0.5;
    // Re-seed the simplex around the incumbent until a fresh simplex no
    // longer finds an improvement; plain Nelder-Mead can stall otherwise.
    while used < budget {
        let run = nelder_mead(&objective, &params, step, ftol, budget - used);
        used += run.evaluations;
        let improvement = value - run.value;
        if run.value <= value {
            params = run.point;
            value = run.value;
        }
        converged = run.converged;
        if converged && improvement <= ftol {
            break;
        }
        step = (step * 0.5).max(1e-3);
    }
    RestartResult {
        params,
        value,
        converged,
    }
}

/// Turns raw parameters into a reported POVM: prune negligible outcomes,
/// restore the constraints, re-profile guesses and fix the gauge.
fn finalize(params: &[f64], nu: usize) -> AntiparallelPovm {
    let (weights, bloch) = decode(params, nu);
    let kept: Vec<(f64, [f64; 3])> = weights
        .into_iter()
        .zip(bloch)
        .filter(|(w, _)| *w >= PRUNE_WEIGHT)
        .collect();
    let total: f64 = kept.iter().map(|(w, _)| w).sum();
    let weights: Vec<f64> = kept.iter().map(|(w, _)| 2.0 * w / total).collect();
    let mut bloch: Vec<[f64; 3]> = kept.into_iter().map(|(_, n)| n).collect();
    project_bloch(&weights, &mut bloch);
    let mut outcomes: Vec<BlockOutcome> = weights
        .into_iter()
        .zip(bloch)
        .map(|(weight, n)| BlockOutcome {
            weight,
            guess: best_guess(n),
            bloch: n,
        })
        .collect();
    // The cost and constraints are invariant under permuting outcomes and
    // under n2 -> -n2 for all outcomes at once.
    outcomes.sort_by(|a, b| {
        b.bloch[0]
            .total_cmp(&a.bloch[0])
            .then(b.bloch[2].total_cmp(&a.bloch[2]))
    });
    if outcomes.first().is_some_and(|o| o.bloch[1] < 0.0) {
        for o in &mut outcomes {
            o.bloch[1] = -o.bloch[1];
        }
    }
    AntiparallelPovm {
        outcomes,
        q33_guess: 0.5,
    }
}

/// [`optimize_antiparallel_with`] under the default options.
pub fn optimize_antiparallel(num_outcomes: usize, seed: u64, tol: f64) -> Result<OptimizedPovm> {
    optimize_antiparallel_with(num_outcomes, seed, tol, &OptimizeOptions::default())
}

/// Minimizes the mean variance over `num_outcomes`-outcome block POVMs.
///
/// Restart `i` starts from a point drawn with seed `derive_seed(seed, i)`.
/// Restarts may run concurrently; the result is the lowest value, ties
/// going to the lowest restart index, so it does not depend on scheduling.
/// Fails with [`Error::NotConverged`] (carrying the best candidate) when
/// no restart's simplex collapsed within the evaluation budget.
pub fn optimize_antiparallel_with(
    num_outcomes: usize,
    seed: u64,
    tol: f64,
    options: &OptimizeOptions,
) -> Result<OptimizedPovm> {
    if num_outcomes == 0 {
        return Err(Error::Argument("need at least one outcome".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    if options.restarts == 0 {
        return Err(Error::Argument("need at least one restart".into()));
    }
    let budget = options.max_evaluations;
    let results = options.exec.map((0..options.restarts).collect(), |i| {
        run_restart(num_outcomes, seed, i, tol, budget)
    });
    let best_restart = (0..results.len())
        .min_by(|&a, &b| results[a].value.total_cmp(&results[b].value).then(a.cmp(&b)))
        .expect("at least one restart");
    let best = &results[best_restart];
    let povm = finalize(&best.params, num_outcomes);
    let value = antiparallel_cost(&povm)?;
    let outcome = OptimizedPovm {
        povm,
        value,
        restarts: results.len(),
        converged_restarts: results.iter().filter(|r| r.converged).count(),
        agreeing_restarts: results
            .iter()
            .filter(|r| r.value - best.value <= tol)
            .count(),
        best_restart,
    };
    if outcome.converged_restarts == 0 {
        return Err(Error::NotConverged {
            restarts: outcome.restarts,
            best: Box::new(outcome),
        });
    }
    Ok(outcome)
}
