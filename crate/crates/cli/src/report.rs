//! Report rows and their human, JSON and CSV renderings.

use std::fmt::Write as _;

use relstate::antiparallel::AntiparallelPovm;
use relstate::simulator::SimResult;
use serde::{Deserialize, Serialize};

use crate::json::to_canonical_string;

/// Comparison outcome of one row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "match")]
    Match,
    #[serde(rename = "mismatch")]
    Mismatch,
    /// A published expression disagrees with the derived value.
    #[serde(rename = "flagged")]
    Flagged,
    /// Nothing to compare against.
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Match => "match",
            Status::Mismatch => "mismatch",
            Status::Flagged => "flagged",
            Status::NotApplicable => "n/a",
        }
    }
}

/// Output format selected with `--format`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Json,
    Csv,
}

/// One computed quantity next to its reference value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub case: String,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    #[serde(rename = "M")]
    pub m: Option<u32>,
    pub d: Option<u32>,
    /// Exact value, `p/q` for rationals.
    pub exact: String,
    pub float: f64,
    pub paper_value: Option<f64>,
    pub status: Status,
}

/// Half a unit in the last place of `reference` at three significant figures.
pub fn three_figure_tolerance(reference: f64) -> f64 {
    if reference == 0.0 {
        return 0.0;
    }
    0.5 * 10f64.powi(reference.abs().log10().floor() as i32 - 2)
}

/// `value` to three significant figures, e.g. `7.41e-2`.
pub fn three_figures(value: f64) -> String {
    format!("{value:.2e}")
}

impl ReportRow {
    fn base(case: impl Into<String>, exact: impl Into<String>, float: f64) -> Self {
        Self {
            case: case.into(),
            n: None,
            m: None,
            d: None,
            exact: exact.into(),
            float,
            paper_value: None,
            status: Status::NotApplicable,
        }
    }

    /// A value with no reference.
    pub fn info(case: impl Into<String>, exact: impl Into<String>, float: f64) -> Self {
        Self::base(case, exact, float)
    }

    /// Matches when `|float - reference| <= tolerance`.
    pub fn compare(
        case: impl Into<String>,
        exact: impl Into<String>,
        float: f64,
        reference: f64,
        tolerance: f64,
    ) -> Self {
        let mut row = Self::base(case, exact, float);
        row.paper_value = Some(reference);
        // Relative slack absorbs the rounding of decimal reference values.
        let slack = 1e-12 * reference.abs().max(1e-300);
        row.status = if (float - reference).abs() <= tolerance + slack {
            Status::Match
        } else {
            Status::Mismatch
        };
        row
    }

    /// Compares against a value printed to three significant figures.
    pub fn three_figure(case: impl Into<String>, exact: impl Into<String>, float: f64, printed: f64) -> Self {
        Self::compare(case, exact, float, printed, three_figure_tolerance(printed))
    }

    /// A published expression, flagged when it differs from the derived one.
    pub fn published(case: impl Into<String>, exact: impl Into<String>, float: f64, agrees: bool) -> Self {
        let mut row = Self::base(case, exact, float);
        row.status = if agrees { Status::Match } else { Status::Flagged };
        row
    }

    pub fn with_counts(mut self, n: u32, m: Option<u32>) -> Self {
        self.n = Some(n);
        self.m = m;
        self
    }

    pub fn with_dim(mut self, d: u32) -> Self {
        self.d = Some(d);
        self
    }
}

/// Result of the antiparallel optimizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntiparallelReport {
    pub outcomes: usize,
    pub seed: u64,
    pub tol: f64,
    pub value: f64,
    pub povm: AntiparallelPovm,
    pub restarts: usize,
    pub converged_restarts: usize,
    pub agreeing_restarts: usize,
    pub rows: Vec<ReportRow>,
}

/// A simulation result with its comparison verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub case: String,
    #[serde(flatten)]
    pub result: SimResult,
    pub z_score: f64,
    pub status: Status,
}

/// Largest `|empirical - analytic| / std_error` accepted as agreement.
pub const MAX_Z_SCORE: f64 = 4.0;

impl SimulationReport {
    pub fn new(case: impl Into<String>, result: SimResult) -> Self {
        let z_score = result.z_score();
        Self {
            case: case.into(),
            status: if z_score <= MAX_Z_SCORE {
                Status::Match
            } else {
                Status::Mismatch
            },
            z_score,
            result,
        }
    }
}

/// Everything a command can print.
#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Rows(Vec<ReportRow>),
    Antiparallel(AntiparallelReport),
    Simulation(SimulationReport),
}

impl Report {
    /// False when any comparison failed.
    pub fn passed(&self) -> bool {
        let rows_ok = |rows: &[ReportRow]| rows.iter().all(|r| r.status != Status::Mismatch);
        match self {
            Report::Rows(rows) => rows_ok(rows),
            Report::Antiparallel(a) => rows_ok(&a.rows),
            Report::Simulation(s) => s.status != Status::Mismatch,
        }
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        Ok(match (format, self) {
            (Format::Json, Report::Rows(rows)) => to_canonical_string(rows)?,
            (Format::Json, Report::Antiparallel(a)) => to_canonical_string(a)?,
            (Format::Json, Report::Simulation(s)) => to_canonical_string(s)?,
            (Format::Csv, Report::Rows(rows)) => rows_csv(rows)?,
            (Format::Csv, Report::Antiparallel(a)) => rows_csv(&a.rows)?,
            (Format::Csv, Report::Simulation(s)) => simulation_csv(s)?,
            (Format::Human, Report::Rows(rows)) => rows_human(rows),
            (Format::Human, Report::Antiparallel(a)) => antiparallel_human(a),
            (Format::Human, Report::Simulation(s)) => simulation_human(s),
        })
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn rows_csv(rows: &[ReportRow]) -> anyhow::Result<String> {
    let with_dim = rows.iter().any(|r| r.d.is_some());
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["case", "N", "M"];
    if with_dim {
        header.push("d");
    }
    header.extend(["exact", "float", "paper", "status"]);
    w.write_record(&header)?;
    for r in rows {
        let mut record = vec![r.case.clone(), opt(r.n), opt(r.m)];
        if with_dim {
            record.push(opt(r.d));
        }
        record.extend([
            r.exact.clone(),
            three_figures(r.float),
            r.paper_value.map(three_figures).unwrap_or_default(),
            r.status.as_str().to_string(),
        ]);
        w.write_record(&record)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn simulation_csv(s: &SimulationReport) -> anyhow::Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header: Vec<String> = [
        "case",
        "empirical_mse",
        "std_error",
        "analytic_mse",
        "z_score",
        "shots_used",
        "status",
        "rng",
    ]
    .map(String::from)
    .to_vec();
    header.extend(s.result.per_outcome_counts.keys().map(|k| format!("count[{k}]")));
    w.write_record(&header)?;
    let r = &s.result;
    let mut record = vec![
        s.case.clone(),
        crate::json::format_float(r.empirical_mse),
        crate::json::format_float(r.std_error),
        crate::json::format_float(r.analytic_mse),
        format!("{:.3}", s.z_score),
        r.shots_used.to_string(),
        s.status.as_str().to_string(),
        r.rng.clone(),
    ];
    record.extend(r.per_outcome_counts.values().map(u64::to_string));
    w.write_record(&record)?;
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn rows_human(rows: &[ReportRow]) -> String {
    let header = ["case", "N", "M", "d", "exact", "float", "paper", "status"].map(String::from);
    let mut table = vec![header.to_vec()];
    for r in rows {
        table.push(vec![
            r.case.clone(),
            opt(r.n),
            opt(r.m),
            opt(r.d),
            r.exact.clone(),
            three_figures(r.float),
            r.paper_value.map(three_figures).unwrap_or_else(|| "-".into()),
            r.status.as_str().to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| table.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &table {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        writeln!(out, "{}", line.join("  ").trim_end()).expect("writing to a String");
    }
    out
}

fn antiparallel_human(a: &AntiparallelReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} outcome(s), seed {}, tol {:e}: value {:.12} ({} of {} restarts converged, {} within tol of best)",
        a.outcomes, a.seed, a.tol, a.value, a.converged_restarts, a.restarts, a.agreeing_restarts
    );
    for (i, o) in a.povm.outcomes.iter().enumerate() {
        let _ = writeln!(
            out,
            "  outcome {}: weight {:.9}  guess {:.9}  bloch ({:+.9}, {:+.9}, {:+.9})",
            i + 1,
            o.weight,
            o.guess,
            o.bloch[0],
            o.bloch[1],
            o.bloch[2]
        );
    }
    let _ = writeln!(out, "  quartet guess {}", a.povm.q33_guess);
    out + &rows_human(&a.rows)
}

fn simulation_human(s: &SimulationReport) -> String {
    let r = &s.result;
    let mut out = String::new();
    let _ = writeln!(out, "{}: {} shots ({})", s.case, r.shots_used, r.rng);
    let _ = writeln!(out, "  empirical mse {:.6e} +- {:.2e}", r.empirical_mse, r.std_error);
    let _ = writeln!(out, "  analytic  mse {:.6e}", r.analytic_mse);
    let _ = writeln!(out, "  z = {:.3}  status {}", s.z_score, s.status.as_str());
    for (label, count) in &r.per_outcome_counts {
        let _ = writeln!(out, "  {label:>6}: {count}");
    }
    out
}
