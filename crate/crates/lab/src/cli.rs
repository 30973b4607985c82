//! `voi` command line: parses flags, resolves the run configuration and
//! writes the experiment's artifacts to the output directory.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use voi_core::rng::{trial_stream, Purpose};
use voi_core::{
    generate_query, learn_reward_model, select_teacher, uniform_prior, LoopConfig, QueryMode, QuerySource,
    Rationality, SimulatedTeacherWorld, Strategy, WeightGrid,
};

use crate::artifacts::{self, Provenance};
use crate::config::{RunConfig, Settings};
use crate::harness::{self, Arm, ConvergencePlan, TrialPlan};

/// Posterior mass a converge trial must put on the true cell.
pub const CONVERGENCE_MASS: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Command {
    /// Best teacher rationality over a (mu, sigma) sweep of Gaussian beliefs.
    PhaseMap,
    /// All five teacher-selection strategies on shared query streams.
    Compare,
    /// Mean selected rationality over training for the two active strategies.
    BetaTrace,
    /// Single-teacher posterior concentration on the true cell.
    Converge,
    /// One learning run with entropy stopping.
    Learn,
}

#[derive(Debug, Parser)]
#[command(name = "voi", version, about = "Teacher selection by value of information for preference-based reward learning")]
pub struct Args {
    pub experiment: Command,
    /// Key-value configuration file.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    /// Grid points per axis.
    #[arg(long)]
    pub grid_points: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// `mse` or `ll`.
    #[arg(long)]
    pub metric: Option<String>,
    /// Entropy threshold for `learn`.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// 21 points per axis and 100 trials (and 100 steps for compare and beta_trace).
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "N"], allow_negative_numbers = true)]
    pub mu: Option<Vec<String>>,
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "N"], allow_negative_numbers = true)]
    pub sigma: Option<Vec<String>>,
    /// `linspace LO HI N` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub pool: Option<String>,
    /// Teacher rationality for `converge`.
    #[arg(long)]
    pub beta: Option<String>,
    /// Queries per trial for `converge`.
    #[arg(long)]
    pub queries: Option<String>,
}

impl Args {
    fn overrides(&self) -> Result<Settings> {
        let mut s = Settings::default();
        let name = self.experiment.to_possible_value().expect("no skipped variants");
        s.set("experiment", name.get_name())?;
        let flags: [(&str, Option<String>); 11] = [
            ("seed", self.seed.clone()),
            ("trials", self.trials.clone()),
            ("steps", self.steps.clone()),
            ("points", self.grid_points.clone()),
            ("out", self.out.clone()),
            ("metric", self.metric.clone()),
            ("epsilon", self.epsilon.clone()),
            ("mu", self.mu.as_ref().map(|v| v.join(" "))),
            ("sigma", self.sigma.as_ref().map(|v| v.join(" "))),
            ("pool", self.pool.clone()),
            ("beta", self.beta.clone()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                s.set(key, &v)?;
            }
        }
        if let Some(q) = &self.queries {
            s.set("queries", q)?;
        }
        if self.full_scale {
            s.full_scale = Some(true);
        }
        Ok(s)
    }

    /// Config file values overlaid with flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("config: cannot read {}", path.display()))?;
                Settings::parse(&text).with_context(|| format!("config {}", path.display()))?
            }
            None => Settings::default(),
        };
        Ok(file.overlay(self.overrides()?).resolve()?)
    }
}

/// Worker count from `VOI_THREADS`, if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("VOI_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => anyhow::bail!("VOI_THREADS: expected a positive integer, got {v:?}"),
        },
    }
}

/// Parses `argv`, runs the experiment and returns the written file names.
pub fn run(args: &Args) -> Result<Vec<String>> {
    let cfg = args.resolve()?;
    let pool_threads = thread_cap()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = pool_threads {
        builder = builder.num_threads(n);
    }
    let workers = builder.build().context("VOI_THREADS: cannot start worker pool")?;
    workers.install(|| execute(&cfg))
}

struct Output<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Output<'_> {
    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).with_context(|| format!("out: cannot write {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Vec<String>> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("out: cannot create {}", cfg.out.display()))?;
    let mut out = Output { dir: &cfg.out, written: Vec::new() };
    out.write("config.resolved.txt", &cfg.to_text())?;

    let grid = Arc::new(cfg.grid.build()?);
    let pool = cfg.pool.to_pool()?;
    let exp = cfg.experiment.name();
    let prov = || Provenance::new(exp).seed(cfg.seed).pool(&pool).grid(&grid);

    match cfg.experiment {
        crate::config::Experiment::PhaseMap => {
            let result = harness::run_phase_map(&cfg.mu.values(), &cfg.sigma.values(), &pool, &grid)?;
            out.write("phase_map.csv", &artifacts::phase_map_csv(&prov(), &result))?;
        }
        crate::config::Experiment::Compare => {
            let plan = restaurant_plan(cfg, &pool, &grid);
            let run = harness::run_strategy_comparison(&plan)?;
            let p = with_plan(prov(), &plan);
            out.write("comparison.csv", &artifacts::comparison_csv(&p, &run.summary()))?;
            out.write("beta_trace.csv", &artifacts::beta_trace_csv(&p, &run.beta_trace()))?;
            for runs in &run.arms {
                let name = format!("trials_{}.csv", runs.arm.name());
                out.write(&name, &artifacts::trials_csv(&p, runs.arm.name(), &runs.records))?;
            }
        }
        crate::config::Experiment::BetaTrace => {
            let plan = restaurant_plan(cfg, &pool, &grid);
            let rows = harness::run_beta_trace(&plan)?;
            out.write("beta_trace.csv", &artifacts::beta_trace_csv(&with_plan(prov(), &plan), &rows))?;
        }
        crate::config::Experiment::Converge => {
            let plan = ConvergencePlan {
                trials: cfg.trials,
                queries: cfg.queries,
                beta: Rationality::new(cfg.beta)?,
                grid: grid.clone(),
                seed: cfg.seed,
                mode: QueryMode::UnitCube { dims: cfg.grid.dims },
                threshold: CONVERGENCE_MASS,
            };
            let result = harness::run_convergence_check(&plan)?;
            let mut p = Provenance::new(exp).seed(cfg.seed).grid(&grid);
            p.push("beta", cfg.beta).push("queries", cfg.queries).push("query_mode", "unit_cube");
            out.write("convergence.csv", &artifacts::convergence_csv(&p, &result))?;
            out.write("convergence_summary.csv", &artifacts::convergence_summary_csv(&p, &result))?;
        }
        crate::config::Experiment::Learn => learn(cfg, &pool, &grid, &prov, &mut out)?,
    }
    Ok(out.written)
}

fn restaurant_plan(cfg: &RunConfig, pool: &voi_core::TeacherPool, grid: &Arc<WeightGrid>) -> TrialPlan {
    let mut plan = TrialPlan::restaurants(cfg.trials, cfg.steps, pool.clone(), grid.clone(), cfg.seed);
    plan.queries = QueryMode::RandomRestaurants { integer_ratings: cfg.integer_ratings };
    plan
}

fn with_plan(mut p: Provenance, plan: &TrialPlan) -> Provenance {
    let integer = matches!(plan.queries, QueryMode::RandomRestaurants { integer_ratings: true });
    p.push("trials", plan.trials).push("steps", plan.steps).push("integer_ratings", integer);
    p
}

/// One run per trial index; the report covers the first query of trial 0
/// under the prior.
fn learn(
    cfg: &RunConfig,
    pool: &voi_core::TeacherPool,
    grid: &Arc<WeightGrid>,
    prov: &dyn Fn() -> Provenance,
    out: &mut Output<'_>,
) -> Result<()> {
    let prior = uniform_prior(grid.clone());
    let loop_cfg = LoopConfig::new(cfg.metric, Strategy::ExpectedMetric, cfg.epsilon, cfg.steps)?;
    let mode = QueryMode::RandomRestaurants { integer_ratings: cfg.integer_ratings };
    let mut records = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials as u64 {
        let w_true = voi_core::learning::sample_true_weights(grid, &mut trial_stream(cfg.seed, trial, Purpose::TrueWeights));
        let mut queries = QuerySource::new(mode.clone(), trial_stream(cfg.seed, trial, Purpose::Queries));
        let mut world = SimulatedTeacherWorld::new(w_true, cfg.seed, trial);
        let mut rng = trial_stream(cfg.seed, trial, Purpose::Selection);
        records.push(learn_reward_model(&prior, pool, &loop_cfg, &mut queries, &mut world, &mut rng)?);
    }

    let mut first = QuerySource::new(mode, trial_stream(cfg.seed, 0, Purpose::Queries));
    let report = select_teacher(&prior, &generate_query(&mut first).diff(), pool, cfg.metric)?;

    let metric = cfg.metric.short_name();
    let mut p = prov();
    p.push("metric", metric).push("epsilon", cfg.epsilon).push("max_steps", cfg.steps);
    let arm = match cfg.metric {
        voi_core::MetricKind::MeanSquaredError => Arm::ExpectedMse,
        voi_core::MetricKind::LogLoss => Arm::ExpectedLogLoss,
    };
    out.write("learn_trace.csv", &artifacts::trials_csv(&p, arm.name(), &records))?;
    out.write(&format!("voi_report_{metric}.csv"), &artifacts::report_csv(&p, &report))?;
    if let Some(first_run) = records.first() {
        let mut bp = p.clone();
        bp.push("trial", first_run.trial).push("w_true", join(&first_run.w_true.0));
        out.write("final_belief.csv", &artifacts::belief_csv(&bp, &first_run.final_belief))?;
    }
    Ok(())
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}
