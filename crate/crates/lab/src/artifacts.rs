//! CSV artifacts.
//!
//! Every file starts with `# key=value` comment lines carrying what is
//! needed to regenerate it, followed by one header row and the data rows.
//! Floats use Rust's shortest round-trip formatting.

use std::fmt::Write as _;

use voi_core::rng::STREAM_ALGORITHM;
use voi_core::{Belief, ExpectedMetricReport, TeacherPool, TrialRecord, WeightGrid};

use crate::harness::{BetaTraceRow, ComparisonRow, ConvergenceResult, PhaseMapResult};

pub const PHASE_MAP_COLUMNS: &[&str] = &["mu", "sigma", "best_beta_mse", "best_beta_ll"];
pub const COMPARISON_COLUMNS: &[&str] = &["strategy", "step", "mean_mse", "std_mse", "mean_ll", "std_ll"];
pub const BETA_TRACE_COLUMNS: &[&str] = &["metric", "step", "mean_beta", "std_beta"];
pub const CONVERGENCE_COLUMNS: &[&str] = &["trial", "step", "true_cell_mass"];
pub const TRIAL_COLUMNS: &[&str] =
    &["trial", "step", "strategy", "chosen_beta", "preference", "mse", "log_loss", "entropy", "query_hash"];
pub const REPORT_COLUMNS: &[&str] = &["beta", "expected_value", "chosen"];

/// Header comment block.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    entries: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(experiment: &str) -> Self {
        let mut p = Self::default();
        p.push("experiment", experiment);
        p.push("build", concat!("voi-lab ", env!("CARGO_PKG_VERSION")));
        p.push("rng", STREAM_ALGORITHM);
        p
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.push("seed", seed);
        self
    }

    pub fn pool(mut self, pool: &TeacherPool) -> Self {
        self.push("pool", join(&pool.betas()));
        self
    }

    pub fn grid(mut self, grid: &WeightGrid) -> Self {
        self.push("grid", grid_spec(grid));
        self
    }

    fn write(&self, out: &mut String) {
        for (k, v) in &self.entries {
            let _ = writeln!(out, "# {k}={v}");
        }
    }
}

/// `lower:upper:points` per axis, axes separated by `x`.
pub fn grid_spec(grid: &WeightGrid) -> String {
    grid.axes().iter().map(|a| format!("{}:{}:{}", a.lower, a.upper, a.points)).collect::<Vec<_>>().join("x")
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn table(prov: &Provenance, columns: &[&str]) -> String {
    let mut out = String::new();
    prov.write(&mut out);
    out.push_str(&columns.join(","));
    out.push('\n');
    out
}

/// One row per cell: index, center coordinates `w0..`, mass.
pub fn belief_csv(prov: &Provenance, belief: &Belief) -> String {
    let grid = belief.grid();
    let mut cols = vec!["cell_index".to_string()];
    cols.extend((0..grid.dims()).map(|k| format!("w{k}")));
    cols.push("mass".into());
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut out = table(prov, &cols);
    for (i, c) in grid.centers().enumerate() {
        let _ = write!(out, "{i}");
        for x in c {
            let _ = write!(out, ",{x}");
        }
        let _ = writeln!(out, ",{}", belief.mass(i));
    }
    out
}

pub fn report_csv(prov: &Provenance, report: &ExpectedMetricReport) -> String {
    let mut out = table(prov, REPORT_COLUMNS);
    for (i, (b, v)) in report.per_beta.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", b.beta(), v, (i == report.chosen_index) as u8);
    }
    out
}

pub fn trials_csv(prov: &Provenance, strategy: &str, records: &[TrialRecord]) -> String {
    let mut out = table(prov, TRIAL_COLUMNS);
    for r in records {
        for s in &r.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:016x}",
                r.trial,
                s.step,
                strategy,
                s.chosen_beta,
                s.preference.as_i8(),
                s.mse,
                s.log_loss,
                s.entropy,
                s.query_fingerprint
            );
        }
    }
    out
}

pub fn phase_map_csv(prov: &Provenance, result: &PhaseMapResult) -> String {
    let mut out = table(prov, PHASE_MAP_COLUMNS);
    for r in &result.rows {
        let _ = writeln!(out, "{},{},{},{}", r.mu, r.sigma, r.best_beta_mse, r.best_beta_ll);
    }
    out
}

pub fn comparison_csv(prov: &Provenance, rows: &[ComparisonRow]) -> String {
    let mut out = table(prov, COMPARISON_COLUMNS);
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.arm.name(), r.step, r.mean_mse, r.std_mse, r.mean_ll, r.std_ll);
    }
    out
}

pub fn beta_trace_csv(prov: &Provenance, rows: &[BetaTraceRow]) -> String {
    let mut out = table(prov, BETA_TRACE_COLUMNS);
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.metric.short_name(), r.step, r.mean_beta, r.std_beta);
    }
    out
}

pub fn convergence_csv(prov: &Provenance, result: &ConvergenceResult) -> String {
    let mut out = table(prov, CONVERGENCE_COLUMNS);
    for t in &result.trials {
        for (step, m) in t.true_cell_mass.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", t.trial, step, m);
        }
    }
    out
}

pub fn convergence_summary_csv(prov: &Provenance, result: &ConvergenceResult) -> String {
    let mut out = table(prov, &["trials", "queries", "beta", "threshold", "fraction_converged", "sign_degenerate"]);
    let p = &result.plan;
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        p.trials,
        p.queries,
        p.beta.beta(),
        p.threshold,
        result.fraction_converged(),
        result.sign_degenerate()
    );
    out
}

/// Parsed CSV body: comment lines skipped, header split off.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn parse(text: &str) -> Option<Self> {
        let mut comments = Vec::new();
        let mut lines = text.lines().filter(|l| !l.is_empty());
        let header = loop {
            let line = lines.next()?;
            match line.strip_prefix("# ") {
                Some(c) => {
                    let (k, v) = c.split_once('=').unwrap_or((c, ""));
                    comments.push((k.to_string(), v.to_string()));
                }
                None => break line,
            }
        };
        let columns = header.split(',').map(str::to_string).collect();
        let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        Some(Self { comments, columns, rows })
    }

    pub fn comment(&self, key: &str) -> Option<&str> {
        self.comments.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}
