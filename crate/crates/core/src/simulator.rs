//! Monte Carlo checks: sample random state pairs, draw measurement
//! outcomes, and compare the empirical mean squared error with the exact
//! mean variance.
//!
//! Shots are processed in fixed chunks of [`CHUNK`] shots. Each chunk sums
//! its shots in order, and chunk sums are folded in chunk order, so results
//! are bit-identical for every shard count and execution mode. Shot `s`
//! reads its random words from a fixed position of the ChaCha8 stream (see
//! [`crate::rng`]).

use std::collections::BTreeMap;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antiparallel::{antiparallel_cost, AntiparallelPovm, BlockBasis, INVARIANT_TOL};
use crate::parallel::{optimal_variance, IrrepLabel, OutcomeModel};
use crate::rng::{ShotStream, RNG_ALGORITHM};
use crate::{Error, Execution, Result};

/// Shots per reduction chunk.
pub const CHUNK: u64 = 4096;

/// Allowed deviation of a probability vector's total from one, and the
/// most negative probability tolerated as rounding dust.
pub const PROBABILITY_FLOOR: f64 = 1e-10;

/// A parallel-copies simulation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: u32,
    pub m: u32,
    pub shots: u64,
    pub seed: u64,
    /// Number of contiguous groups of chunks scheduled as separate tasks;
    /// `0` schedules every chunk separately. Never affects results.
    pub shards: usize,
    pub exec: Execution,
}

impl SimConfig {
    pub fn new(n: u32, m: u32, shots: u64, seed: u64) -> Self {
        Self {
            n,
            m,
            shots,
            seed,
            shards: 0,
            exec: Execution::Parallel,
        }
    }
}

/// Empirical estimate of the mean variance next to its exact value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub empirical_mse: f64,
    pub std_error: f64,
    pub analytic_mse: f64,
    pub shots_used: u64,
    pub per_outcome_counts: BTreeMap<String, u64>,
    pub rng: String,
}

impl SimResult {
    /// `|empirical - analytic|` in units of the standard error.
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            if self.empirical_mse == self.analytic_mse {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.empirical_mse - self.analytic_mse).abs() / self.std_error
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Tally {
    shots: u64,
    sum: f64,
    sum_sq: f64,
    counts: Vec<u64>,
}

impl Tally {
    fn new(outcomes: usize) -> Self {
        Self {
            shots: 0,
            sum: 0.0,
            sum_sq: 0.0,
            counts: vec![0; outcomes],
        }
    }

    fn record(&mut self, outcome: usize, value: f64) {
        self.shots += 1;
        self.sum += value;
        self.sum_sq += value * value;
        self.counts[outcome] += 1;
    }

    fn merge(&mut self, o: &Tally) {
        self.shots += o.shots;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        for (a, b) in self.counts.iter_mut().zip(&o.counts) {
            *a += b;
        }
    }

    /// Sample mean and its standard error.
    fn estimate(&self) -> (f64, f64) {
        let n = self.shots as f64;
        let mean = self.sum / n;
        if self.shots < 2 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Runs `chunk` over all shot chunks and reduces the tallies in chunk order.
fn run_sharded<F>(shots: u64, shards: usize, exec: Execution, outcomes: usize, chunk: F) -> Result<Tally>
where
    F: Fn(Range<u64>) -> Result<Tally> + Sync + Send,
{
    if shots == 0 {
        return Err(Error::Argument("need at least one shot".into()));
    }
    let n_chunks = shots.div_ceil(CHUNK) as usize;
    let groups = if shards == 0 { n_chunks } else { shards.min(n_chunks) };
    let group_ranges: Vec<Range<usize>> = (0..groups)
        .map(|g| g * n_chunks / groups..(g + 1) * n_chunks / groups)
        .collect();
    let per_group = exec.map(group_ranges, |chunks| {
        chunks
            .map(|c| {
                let start = c as u64 * CHUNK;
                chunk(start..(start + CHUNK).min(shots))
            })
            .collect::<Result<Vec<Tally>>>()
    });
    let mut total = Tally::new(outcomes);
    for group in per_group {
        for t in group? {
            total.merge(&t);
        }
    }
    Ok(total)
}

/// Samples an outcome from nonnegative `probs` given a uniform draw.
fn pick(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if target < acc {
            return i;
        }
    }
    // Rounding can leave `target` at the very top; take the last nonzero.
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// Checks normalization and clamps negative rounding dust to zero.
fn sanitize(probs: &mut [f64]) -> Result<()> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_FLOOR {
        return Err(Error::Numerical(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    for p in probs.iter_mut() {
        if *p < -PROBABILITY_FLOOR {
            return Err(Error::Numerical(format!("negative outcome probability {p}")));
        }
        *p = p.max(0.0);
    }
    Ok(())
}

/// Overlap of an independent Haar-random qubit pair: uniform on `[0, 1]`.
pub fn sample_overlap(stream: &mut ShotStream) -> f64 {
    stream.uniform()
}

/// A Haar-random pure state in dimension `d` (normalized complex Gaussian).
pub fn haar_state(stream: &mut ShotStream, d: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..d)
        .map(|_| {
            let (re, im) = stream.normal_pair();
            Complex64::new(re, im)
        })
        .collect();
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= norm);
    v
}

/// A Haar-random qubit.
pub fn haar_qubit(stream: &mut ShotStream) -> [Complex64; 2] {
    let v = haar_state(stream, 2);
    [v[0], v[1]]
}

fn overlap(u: &[Complex64], v: &[Complex64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .norm_sqr()
}

/// [`sample_overlap`] computed from an explicit Haar pair.
pub fn sample_overlap_haar(stream: &mut ShotStream) -> f64 {
    let u = haar_qubit(stream);
    let v = haar_qubit(stream);
    overlap(&u, &v)
}

/// Overlap of a Haar pair in dimension `d >= 2`, from its Beta(1, d-1) law.
pub fn sample_overlap_qudit(stream: &mut ShotStream, d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::Argument(format!("dimension must be >= 2, got {d}")));
    }
    Ok(1.0 - stream.uniform_open().powf(1.0 / f64::from(d - 1)))
}

/// [`sample_overlap_qudit`] computed from an explicit Haar pair.
pub fn sample_overlap_qudit_haar(stream: &mut ShotStream, d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::Argument(format!("dimension must be >= 2, got {d}")));
    }
    let u = haar_state(stream, d as usize);
    let v = haar_state(stream, d as usize);
    Ok(overlap(&u, &v))
}

/// Simulates the optimal measurement on `N` and `M` copies.
///
/// Per shot: draw the overlap `x`, compute the block probabilities, sample
/// a block, and record `(guess - x)^2`.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimResult> {
    let model = OutcomeModel::new(cfg.n, cfg.m)?;
    let outcomes = model.labels().len();
    let tally = run_sharded(cfg.shots, cfg.shards, cfg.exec, outcomes, |shots| {
        let mut stream = ShotStream::new(cfg.seed);
        let mut scratch = Vec::with_capacity(cfg.m as usize + 1);
        let mut probs = vec![0.0; outcomes];
        let mut tally = Tally::new(outcomes);
        for shot in shots {
            stream.seek(shot);
            let x = sample_overlap(&mut stream);
            model.distribution_into(x, &mut scratch, &mut probs);
            sanitize(&mut probs)?;
            let k = pick(&probs, stream.uniform());
            let err = model.guesses()[k] - x;
            tally.record(k, err * err);
        }
        Ok(tally)
    })?;
    let (empirical_mse, std_error) = tally.estimate();
    Ok(SimResult {
        empirical_mse,
        std_error,
        analytic_mse: optimal_variance(cfg.n, cfg.m)?.value,
        shots_used: tally.shots,
        per_outcome_counts: model
            .labels()
            .iter()
            .map(IrrepLabel::to_string)
            .zip(tally.counts)
            .collect(),
        rng: RNG_ALGORITHM.to_string(),
    })
}

/// Monte Carlo estimate of `I_k^alpha = E_x[p_k(x) x^alpha]`, `x` uniform.
/// Returns `(estimate, standard error)`.
pub fn moment_oracle(
    n: u32,
    m: u32,
    k: u32,
    alpha: u32,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if alpha > 2 {
        return Err(Error::Argument(format!("alpha must be 0, 1 or 2, got {alpha}")));
    }
    let model = OutcomeModel::new(n, m)?;
    let index = model
        .labels()
        .iter()
        .position(|l| l.k() == k)
        .ok_or_else(|| Error::Argument(format!("k={k} is not a block of N={n}, M={m}")))?;
    let outcomes = model.labels().len();
    let tally = run_sharded(samples, 0, Execution::Parallel, 1, |shots| {
        let mut stream = ShotStream::new(seed);
        let mut scratch = Vec::with_capacity(m as usize + 1);
        let mut probs = vec![0.0; outcomes];
        let mut tally = Tally::new(1);
        for shot in shots {
            stream.seek(shot);
            let x = sample_overlap(&mut stream);
            model.distribution_into(x, &mut scratch, &mut probs);
            tally.record(0, probs[index] * x.powi(alpha as i32));
        }
        Ok(tally)
    })?;
    Ok(tally.estimate())
}

/// Outcome probabilities of a block POVM on `|u> |u_perp> |v>`: the doublet
/// outcomes in order, then the quartet outcome last.
///
/// The off-diagonal doublet operator is `-sum_m |S;m><T;m|`, the phase in
/// which [`antiparallel_cost`] is written.
pub fn antiparallel_probabilities(
    povm: &AntiparallelPovm,
    basis: &BlockBasis,
    u: &[Complex64; 2],
    v: &[Complex64; 2],
) -> Result<Vec<f64>> {
    // SU(2) partner of u: the image of |1> under the rotation taking |0> to u.
    let perp = [-u[1].conj(), u[0].conj()];
    let mut psi = [Complex64::new(0.0, 0.0); 8];
    for (i, amp) in psi.iter_mut().enumerate() {
        *amp = u[i >> 2 & 1] * perp[i >> 1 & 1] * v[i & 1];
    }
    let project = |b: &[f64; 8]| -> Complex64 { b.iter().zip(&psi).map(|(x, y)| y * x).sum() };
    let s = basis.singlet.each_ref().map(project);
    let t = basis.triplet.each_ref().map(project);
    let singlet: f64 = s.iter().map(|c| c.norm_sqr()).sum();
    let triplet: f64 = t.iter().map(|c| c.norm_sqr()).sum();
    let quartet: f64 = basis.quartet.iter().map(|q| project(q).norm_sqr()).sum();
    let cross: Complex64 = -s.iter().zip(&t).map(|(a, b)| a.conj() * b).sum::<Complex64>();
    let mut probs: Vec<f64> = povm
        .outcomes
        .iter()
        .map(|o| {
            let [n1, n2, n3] = o.bloch;
            0.5 * o.weight
                * ((1.0 + n3) * singlet
                    + (1.0 - n3) * triplet
                    + 2.0 * (n1 * cross.re + n2 * cross.im))
        })
        .collect();
    probs.push(quartet);
    sanitize(&mut probs)?;
    Ok(probs)
}

/// [`simulate_antiparallel_with`] with default scheduling.
pub fn simulate_antiparallel(povm: &AntiparallelPovm, shots: u64, seed: u64) -> Result<SimResult> {
    simulate_antiparallel_with(povm, shots, seed, 0, Execution::Parallel)
}

/// Simulates a block POVM on Haar-random `|u>|u_perp>` and `|v>` and records
/// `(guess - |<u|v>|^2)^2`.
pub fn simulate_antiparallel_with(
    povm: &AntiparallelPovm,
    shots: u64,
    seed: u64,
    shards: usize,
    exec: Execution,
) -> Result<SimResult> {
    povm.validate(INVARIANT_TOL)?;
    let basis = BlockBasis::build()?;
    let guesses: Vec<f64> = povm
        .outcomes
        .iter()
        .map(|o| o.guess)
        .chain([povm.q33_guess])
        .collect();
    let outcomes = guesses.len();
    let tally = run_sharded(shots, shards, exec, outcomes, |range| {
        let mut stream = ShotStream::new(seed);
        let mut tally = Tally::new(outcomes);
        for shot in range {
            stream.seek(shot);
            let u = haar_qubit(&mut stream);
            let v = haar_qubit(&mut stream);
            let probs = antiparallel_probabilities(povm, &basis, &u, &v)?;
            let i = pick(&probs, stream.uniform());
            let err = guesses[i] - overlap(&u, &v);
            tally.record(i, err * err);
        }
        Ok(tally)
    })?;
    let (empirical_mse, std_error) = tally.estimate();
    let names = (1..outcomes).map(|i| format!("x{i}")).chain(["q33".to_string()]);
    Ok(SimResult {
        empirical_mse,
        std_error,
        analytic_mse: antiparallel_cost(povm)?,
        shots_used: tally.shots,
        per_outcome_counts: names.zip(tally.counts).collect(),
        rng: RNG_ALGORITHM.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antiparallel::reference_optimum;

    fn mean_of(n: usize, seed: u64, mut f: impl FnMut(&mut ShotStream) -> f64) -> (f64, f64) {
        let mut s = ShotStream::new(seed);
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let x = f(&mut s);
            m1 += x;
            m2 += x * x;
        }
        (m1 / n as f64, m2 / n as f64)
    }

    #[test]
    fn uniform_and_haar_overlaps_agree() {
        let n = 1_000_000;
        let (a1, a2) = mean_of(n, 1, sample_overlap);
        let (b1, b2) = mean_of(n, 2, sample_overlap_haar);
        for (m1, m2) in [(a1, a2), (b1, b2)] {
            assert!((m1 - 0.5).abs() < 0.002, "{m1}");
            assert!((m2 - 1.0 / 3.0).abs() < 0.002, "{m2}");
        }
    }

    #[test]
    fn qudit_overlap_mean_is_one_over_d() {
        for d in [2u32, 3, 5, 8] {
            let n = 200_000;
            let (a, _) = mean_of(n, 3, |s| sample_overlap_qudit(s, d).unwrap());
            let (b, _) = mean_of(n, 4, |s| sample_overlap_qudit_haar(s, d).unwrap());
            let target = 1.0 / f64::from(d);
            assert!((a - target).abs() < 0.004, "d={d} beta {a}");
            assert!((b - target).abs() < 0.004, "d={d} haar {b}");
        }
        assert!(sample_overlap_qudit(&mut ShotStream::new(0), 1).is_err());
    }

    #[test]
    fn pick_respects_boundaries() {
        assert_eq!(pick(&[0.0, 1.0], 0.0), 1);
        assert_eq!(pick(&[0.5, 0.5], 0.499), 0);
        assert_eq!(pick(&[0.5, 0.5, 0.0], 1.0), 1);
    }

    #[test]
    fn shard_count_does_not_change_results() {
        let mut cfg = SimConfig::new(2, 3, 20_000, 11);
        let base = run_simulation(&cfg).unwrap();
        for (shards, exec) in [(1, Execution::Sequential), (3, Execution::Parallel), (7, Execution::Parallel)] {
            cfg.shards = shards;
            cfg.exec = exec;
            assert_eq!(run_simulation(&cfg).unwrap(), base);
        }
        assert_eq!(base.per_outcome_counts.values().sum::<u64>(), 20_000);
        assert_eq!(base.per_outcome_counts.len(), 3);
    }

    #[test]
    fn small_simulation_is_close() {
        let r = run_simulation(&SimConfig::new(1, 1, 200_000, 5)).unwrap();
        assert!(r.z_score() < 4.0, "{r:?}");
        assert!((r.analytic_mse - 2.0 / 27.0).abs() < 1e-16);
        assert!(r.std_error > 0.0);
    }

    #[test]
    fn moment_oracle_one_one() {
        let (est, se) = moment_oracle(1, 1, 0, 1, 200_000, 9).unwrap();
        assert!((est - 1.0 / 12.0).abs() < 4.0 * se, "{est} +- {se}");
        assert!(moment_oracle(1, 1, 1, 0, 10, 0).is_err());
        assert!(moment_oracle(1, 1, 0, 3, 10, 0).is_err());
    }

    #[test]
    fn antiparallel_probabilities_are_normalized_and_covariant() {
        let basis = BlockBasis::build().unwrap();
        let povm = reference_optimum();
        let mut s = ShotStream::new(21);
        for _ in 0..200 {
            let u = haar_qubit(&mut s);
            let v = haar_qubit(&mut s);
            let g = haar_qubit(&mut s);
            // Rotation with first column g.
            let rot = |w: &[Complex64; 2]| {
                [
                    g[0] * w[0] - g[1].conj() * w[1],
                    g[1] * w[0] + g[0].conj() * w[1],
                ]
            };
            let p = antiparallel_probabilities(&povm, &basis, &u, &v).unwrap();
            let q = antiparallel_probabilities(&povm, &basis, &rot(&u), &rot(&v)).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (a, b) in p.iter().zip(&q) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn antiparallel_simulation_is_deterministic() {
        let povm = reference_optimum();
        let a = simulate_antiparallel_with(&povm, 10_000, 3, 1, Execution::Sequential).unwrap();
        let b = simulate_antiparallel_with(&povm, 10_000, 3, 5, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.per_outcome_counts.keys().collect::<Vec<_>>(), ["q33", "x1", "x2"]);
    }
}
