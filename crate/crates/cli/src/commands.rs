//! One function per subcommand; each returns a [`Report`].

use anyhow::Result;
use relstate::antiparallel::{
    block_structure_check, optimize_antiparallel, reference_optimum, reference_value, Surd3,
};
use relstate::asymptotic::asymptotic_optimum;
use relstate::dense::trace_moments;
use relstate::parallel::{moments, optimal_povm, optimal_variance, IrrepLabel};
use relstate::qudit::{optimal_guesses, permutation_trace_oracle, qudit_moments, qudit_variance};
use relstate::simulator::{moment_oracle, run_simulation, simulate_antiparallel_with, SimConfig};
use relstate::{format_rational, rational_to_f64, BigRational, Execution};

use crate::report::{AntiparallelReport, Report, ReportRow, SimulationReport, Status};

/// Published minimal variances `(N, M, value)`; `M = None` is the
/// infinite-reference column.
pub const PUBLISHED_TABLE: [(u32, Option<u32>, f64); 8] = [
    (1, Some(1), 7.41e-2),
    (1, Some(2), 6.94e-2),
    (1, Some(300), 5.57e-2),
    (2, Some(2), 6.25e-2),
    (2, Some(3), 5.83e-2),
    (7, Some(7), 3.29e-2),
    (20, Some(20), 1.45e-2),
    (1, None, 5.56e-2),
];

/// Published two-outcome guesses of the orthogonal-pair optimum.
pub const PUBLISHED_GUESSES: [f64; 2] = [0.644_338, 0.355_662];

/// Accepted distance of an optimized guess from its published digits.
pub const GUESS_TOLERANCE: f64 = 1e-5;

/// Accepted distance between the orthogonal-pair optimum and `Delta(1, 2)`.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-6;

fn published(n: u32, m: Option<u32>) -> Option<f64> {
    PUBLISHED_TABLE
        .iter()
        .find(|(pn, pm, _)| *pn == n && *pm == m)
        .map(|(_, _, v)| *v)
}

fn variance_row(n: u32, m: u32) -> Result<ReportRow> {
    let v = optimal_variance(n, m)?;
    let exact = format_rational(&v.exact);
    let row = match published(n, Some(m)) {
        Some(p) => ReportRow::three_figure("parallel", exact, v.value, p),
        None => ReportRow::info("parallel", exact, v.value),
    };
    Ok(row.with_counts(n, Some(m)))
}

fn asymptotic_row() -> ReportRow {
    let (_, value) = asymptotic_optimum();
    let float = rational_to_f64(&value);
    let printed = published(1, None).expect("tabulated");
    ReportRow::three_figure("asymptotic", format_rational(&value), float, printed).with_counts(1, None)
}

/// Every published cell of the minimal-variance table.
pub fn table() -> Result<Report> {
    let mut rows = Vec::new();
    for (n, m, _) in PUBLISHED_TABLE {
        rows.push(match m {
            Some(m) => variance_row(n, m)?,
            None => asymptotic_row(),
        });
    }
    Ok(Report::Rows(rows))
}

/// Minimal variance for `n` and `m` copies, with the optimal guesses.
pub fn variance(n: u32, m: u32) -> Result<Report> {
    let mut rows = vec![variance_row(n, m)?];
    for (label, guess) in optimal_povm(n, m)?.entries {
        rows.push(
            ReportRow::info(format!("guess {label}"), format_rational(&guess), rational_to_f64(&guess))
                .with_counts(n, Some(m)),
        );
    }
    Ok(Report::Rows(rows))
}

/// Derived qudit variance next to the published closed expression.
pub fn qudit(d: u32) -> Result<Report> {
    let v = qudit_variance(d)?;
    let derived = format_rational(&v.derived);
    let derived_row = if d == 2 {
        // The qubit case is the (1, 1) table cell.
        ReportRow::three_figure("qudit derived", derived, v.derived_f64(), published(1, Some(1)).expect("tabulated"))
    } else {
        ReportRow::info("qudit derived", derived, v.derived_f64())
    };
    let formula_row = ReportRow::published(
        "qudit paper_formula",
        format_rational(&v.paper_formula),
        v.paper_formula_f64(),
        !v.flagged(),
    );
    let (anti, sym) = optimal_guesses(d)?;
    let guess = |case: &str, g: &BigRational| ReportRow::info(case, format_rational(g), rational_to_f64(g)).with_dim(d);
    Ok(Report::Rows(vec![
        derived_row.with_dim(d),
        formula_row.with_dim(d),
        guess("guess antisymmetric", &anti),
        guess("guess symmetric", &sym),
    ]))
}

/// One qubit against a classical reference.
pub fn asymptotic() -> Result<Report> {
    let (g, _) = asymptotic_optimum();
    Ok(Report::Rows(vec![
        asymptotic_row(),
        ReportRow::info("guess |0>", format_rational(&g.x0), rational_to_f64(&g.x0)).with_counts(1, None),
        ReportRow::info("guess |1>", format_rational(&g.x1), rational_to_f64(&g.x1)).with_counts(1, None),
    ]))
}

/// Optimizes the orthogonal-pair POVM and compares with `Delta(1, 2)`.
pub fn antiparallel(outcomes: usize, seed: u64, tol: f64) -> Result<Report> {
    let r = optimize_antiparallel(outcomes, seed, tol)?;
    let reference = reference_value();
    let mut rows = Vec::new();
    if outcomes >= 2 {
        let target = rational_to_f64(&reference);
        rows.push(ReportRow::three_figure(
            "antiparallel value",
            format_rational(&reference),
            r.value,
            published(1, Some(2)).expect("tabulated"),
        ));
        rows.push(ReportRow::compare(
            "antiparallel - parallel(1,2)",
            "0",
            r.value - target,
            0.0,
            EQUIVALENCE_TOLERANCE,
        ));
    } else {
        rows.push(ReportRow::info("antiparallel value", "1/12", r.value));
    }
    let closed = ["1/2+sqrt(3)/12", "1/2-sqrt(3)/12"];
    for (i, o) in r.povm.outcomes.iter().enumerate() {
        let case = format!("antiparallel guess {}", i + 1);
        rows.push(if r.povm.outcomes.len() == 2 {
            ReportRow::compare(case, closed[i], o.guess, PUBLISHED_GUESSES[i], GUESS_TOLERANCE)
        } else {
            ReportRow::info(case, "", o.guess)
        });
    }
    Ok(Report::Antiparallel(AntiparallelReport {
        outcomes,
        seed,
        tol,
        value: r.value,
        povm: r.povm,
        restarts: r.restarts,
        converged_restarts: r.converged_restarts,
        agreeing_restarts: r.agreeing_restarts,
        rows,
    }))
}

/// Monte Carlo run of the optimal parallel-copies measurement.
pub fn simulate(n: u32, m: u32, shots: u64, seed: u64, shards: usize) -> Result<Report> {
    let cfg = SimConfig {
        shards,
        ..SimConfig::new(n, m, shots, seed)
    };
    let result = run_simulation(&cfg)?;
    Ok(Report::Simulation(SimulationReport::new(format!("parallel N={n} M={m}"), result)))
}

/// Monte Carlo run of the closed-form orthogonal-pair optimum.
pub fn simulate_antiparallel(shots: u64, seed: u64, shards: usize) -> Result<Report> {
    let result = simulate_antiparallel_with(&reference_optimum(), shots, seed, shards, Execution::Parallel)?;
    Ok(Report::Simulation(SimulationReport::new("antiparallel optimum", result)))
}

fn exact_row(case: String, oracle: &BigRational, closed: &BigRational) -> ReportRow {
    let mut row = ReportRow::info(case, format_rational(oracle), rational_to_f64(oracle));
    row.paper_value = Some(rational_to_f64(closed));
    row.status = if oracle == closed {
        Status::Match
    } else {
        Status::Mismatch
    };
    row
}

/// Qudit closed forms against explicit permutation traces.
pub fn oracle_permutation(dims: &[u32]) -> Result<Report> {
    let mut rows = Vec::new();
    for &d in dims {
        let oracle = permutation_trace_oracle(d)?;
        let closed = qudit_moments(d)?;
        for (block, o, c) in [("antisym", &oracle.antisym, &closed.antisym), ("sym", &oracle.sym, &closed.sym)] {
            for (alpha, ov, cv) in [(0, &o.i0, &c.i0), (1, &o.i1, &c.i1), (2, &o.i2, &c.i2)] {
                rows.push(exact_row(format!("I{alpha} {block}"), ov, cv).with_dim(d));
            }
        }
    }
    Ok(Report::Rows(rows))
}

/// Closed-form parallel moments against dense projector traces.
pub fn oracle_dense(pairs: &[(u32, u32)]) -> Result<Report> {
    let mut rows = Vec::new();
    for &(n, m) in pairs {
        let dense = trace_moments(n, m)?;
        let closed = moments(n, m)?;
        for (label, c) in &closed {
            let o = dense
                .get(label)
                .ok_or_else(|| anyhow::anyhow!("dense oracle has no block {label}"))?;
            for (alpha, ov, cv) in [(0, &o.i0, &c.i0), (1, &o.i1, &c.i1), (2, &o.i2, &c.i2)] {
                rows.push(exact_row(format!("I{alpha} {label}"), ov, cv).with_counts(n, Some(m)));
            }
        }
    }
    Ok(Report::Rows(rows))
}

/// Monte Carlo estimate of one moment against its exact value.
pub fn oracle_moment(n: u32, m: u32, k: u32, alpha: u32, samples: u64, seed: u64) -> Result<Report> {
    let mo = moments(n, m)?;
    let t = mo
        .get(&IrrepLabel::new(k))
        .ok_or_else(|| relstate::Error::Argument(format!("k={k} is not a block of N={n}, M={m}")))?;
    let exact = match alpha {
        0 => &t.i0,
        1 => &t.i1,
        2 => &t.i2,
        _ => return Err(relstate::Error::Argument(format!("alpha must be 0, 1 or 2, got {alpha}")).into()),
    };
    let (estimate, se) = moment_oracle(n, m, k, alpha, samples, seed)?;
    let mut row = ReportRow::compare(
        format!("I{alpha} k={k} monte carlo"),
        format_rational(exact),
        estimate,
        rational_to_f64(exact),
        crate::report::MAX_Z_SCORE * se,
    );
    row = row.with_counts(n, Some(m));
    Ok(Report::Rows(vec![row]))
}

/// Printed block-moment coefficients against exact operator traces.
pub fn oracle_blocks() -> Result<Report> {
    let r = block_structure_check()?;
    let mut rows: Vec<ReportRow> = r
        .checks
        .iter()
        .map(|c| {
            let mut row = ReportRow::info(format!("I{} {}", c.moment, c.block), c.computed.to_string(), c.computed.to_f64());
            row.paper_value = Some(c.printed.to_f64());
            row.status = if c.matches() { Status::Match } else { Status::Mismatch };
            row
        })
        .collect();
    let check = |case: &str, ok: bool| {
        let mut row = ReportRow::info(case, if ok { "true" } else { "false" }, if ok { 1.0 } else { 0.0 });
        row.status = if ok { Status::Match } else { Status::Mismatch };
        row
    };
    rows.push(check("1_00 + 1_11 + 1_33 = 1", r.completeness));
    rows.push(check("block operator algebra", r.algebra));
    rows.push(check("1_01 and 1_10 coefficients equal", r.off_diagonal_symmetric));
    rows.push(ReportRow::info("tr 1_33", r.quartet_trace.to_string(), r.quartet_trace.to_f64()));
    let poly = |p: &[Surd3; 3]| format!("{} + ({})x + ({})x^2", p[0], p[1], p[2]);
    rows.push(ReportRow::info("f01 implied by I0,I1,I2", poly(&r.f01_derived), r.f01_derived[1].to_f64()));
    rows.push(ReportRow::published(
        "f01 printed",
        poly(&r.f01_printed),
        r.f01_printed[1].to_f64(),
        r.f01_consistent(),
    ));
    Ok(Report::Rows(rows))
}
