//! Batch experiments over many seeded trials.
//!
//! Trials are independent and run on the rayon pool; results are always
//! collected in trial order so repeated runs are bit-identical.

use std::sync::Arc;

use rayon::prelude::*;
use voi_core::learning::{sample_true_weights, Snapshot};
use voi_core::rng::{trial_stream, Purpose};
use voi_core::voi::QueryEvaluator;
use voi_core::{
    generate_query, learn_reward_model, uniform_prior, Belief, FeatureDiff, LoopConfig, MetricKind, QueryMode,
    QuerySource, Rationality, SimulatedTeacherWorld, Strategy, TeacherPool, TrialRecord, VoiError, WeightGrid,
};

pub type Result<T> = std::result::Result<T, VoiError>;

/// Discretized normal belief over a one-dimensional grid.
#[derive(Debug, Clone)]
pub struct GaussianBeliefSpec {
    pub mu: f64,
    pub sigma: f64,
    pub grid: Arc<WeightGrid>,
}

impl GaussianBeliefSpec {
    pub fn to_belief(&self) -> Result<Belief> {
        if self.grid.dims() != 1 {
            return Err(VoiError::DimensionMismatch { expected: 1, actual: self.grid.dims() });
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(VoiError::InvalidConfig("sigma must be positive and finite"));
        }
        let logs = self
            .grid
            .centers()
            .map(|c| {
                let z = (c[0] - self.mu) / self.sigma;
                -0.5 * z * z
            })
            .collect();
        Belief::from_log_weights(self.grid.clone(), logs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMapRow {
    pub mu: f64,
    pub sigma: f64,
    pub best_beta_mse: f64,
    pub best_beta_ll: f64,
}

/// Most informative teacher for each Gaussian belief, `mu`-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMapResult {
    pub rows: Vec<PhaseMapRow>,
}

impl PhaseMapResult {
    pub fn at(&self, mu: f64, sigma: f64) -> Option<&PhaseMapRow> {
        self.rows.iter().find(|r| r.mu == mu && r.sigma == sigma)
    }
}

fn best_beta(eval: &QueryEvaluator<'_>, pool: &TeacherPool, metric: MetricKind) -> f64 {
    let mut best: Option<(f64, f64)> = None;
    for b in pool.iter() {
        let v = eval.expected(metric, b);
        match best {
            Some((bv, bb)) if v > bv || (v == bv && b.beta() >= bb) => {}
            _ => best = Some((v, b.beta())),
        }
    }
    best.map(|(_, b)| b).unwrap_or(f64::NAN)
}

/// Sweeps Gaussian beliefs with a fixed query difference of `1`.
pub fn run_phase_map(mu_axis: &[f64], sigma_axis: &[f64], pool: &TeacherPool, grid: &Arc<WeightGrid>) -> Result<PhaseMapResult> {
    let phi = FeatureDiff(vec![1.0]);
    let points: Vec<(f64, f64)> = mu_axis.iter().flat_map(|&m| sigma_axis.iter().map(move |&s| (m, s))).collect();
    let rows = points
        .par_iter()
        .map(|&(mu, sigma)| {
            let belief = GaussianBeliefSpec { mu, sigma, grid: grid.clone() }.to_belief()?;
            let eval = QueryEvaluator::new(&belief, &phi)?;
            Ok(PhaseMapRow {
                mu,
                sigma,
                best_beta_mse: best_beta(&eval, pool, MetricKind::MeanSquaredError),
                best_beta_ll: best_beta(&eval, pool, MetricKind::LogLoss),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseMapResult { rows })
}

/// Teacher-selection rules compared in the strategy experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    ExpectedMse,
    ExpectedLogLoss,
    LargestBeta,
    RandomBeta,
    FixedBetaOne,
}

impl Arm {
    pub const ALL: [Arm; 5] = [Arm::ExpectedMse, Arm::ExpectedLogLoss, Arm::LargestBeta, Arm::RandomBeta, Arm::FixedBetaOne];
    pub const ACTIVE: [Arm; 2] = [Arm::ExpectedMse, Arm::ExpectedLogLoss];

    pub fn name(self) -> &'static str {
        match self {
            Arm::ExpectedMse => "emse",
            Arm::ExpectedLogLoss => "ell",
            Arm::LargestBeta => "largest_beta",
            Arm::RandomBeta => "random_beta",
            Arm::FixedBetaOne => "beta_one",
        }
    }

    fn strategy(self) -> (Strategy, MetricKind) {
        match self {
            Arm::ExpectedMse => (Strategy::ExpectedMetric, MetricKind::MeanSquaredError),
            Arm::ExpectedLogLoss => (Strategy::ExpectedMetric, MetricKind::LogLoss),
            Arm::LargestBeta => (Strategy::LargestBeta, MetricKind::LogLoss),
            Arm::RandomBeta => (Strategy::RandomBeta, MetricKind::LogLoss),
            Arm::FixedBetaOne => (Strategy::FixedBetaOne, MetricKind::LogLoss),
        }
    }
}

/// Shared settings of the multi-trial experiments.
#[derive(Debug, Clone)]
pub struct TrialPlan {
    pub trials: usize,
    pub steps: usize,
    pub pool: TeacherPool,
    pub grid: Arc<WeightGrid>,
    pub seed: u64,
    pub queries: QueryMode,
}

impl TrialPlan {
    /// Restaurant queries on the given grid.
    pub fn restaurants(trials: usize, steps: usize, pool: TeacherPool, grid: Arc<WeightGrid>, seed: u64) -> Self {
        Self { trials, steps, pool, grid, seed, queries: QueryMode::RandomRestaurants { integer_ratings: false } }
    }
}

/// One trial of one arm; arms with the same `(seed, trial)` share the true
/// weights, the query sequence and the teacher-noise draws.
pub fn run_arm_trial(plan: &TrialPlan, arm: Arm, trial: u64) -> Result<TrialRecord> {
    let prior = uniform_prior(plan.grid.clone());
    let w_true = sample_true_weights(&plan.grid, &mut trial_stream(plan.seed, trial, Purpose::TrueWeights));
    if plan.steps == 0 {
        return Ok(TrialRecord {
            seed: plan.seed,
            trial,
            initial: Snapshot::of(&prior, &w_true)?,
            w_true,
            steps: Vec::new(),
            final_belief: prior,
        });
    }
    let (strategy, metric) = arm.strategy();
    let cfg = LoopConfig::new(metric, strategy, 0.0, plan.steps)?;
    let mut queries = QuerySource::new(plan.queries.clone(), trial_stream(plan.seed, trial, Purpose::Queries));
    let mut world = SimulatedTeacherWorld::new(w_true, plan.seed, trial);
    let mut rng = trial_stream(plan.seed, trial, Purpose::Selection);
    learn_reward_model(&prior, &plan.pool, &cfg, &mut queries, &mut world, &mut rng)
}

#[derive(Debug, Clone)]
pub struct ArmRuns {
    pub arm: Arm,
    pub records: Vec<TrialRecord>,
}

fn run_arms(plan: &TrialPlan, arms: &[Arm]) -> Result<Vec<ArmRuns>> {
    let jobs: Vec<(Arm, u64)> = arms.iter().flat_map(|&a| (0..plan.trials as u64).map(move |t| (a, t))).collect();
    let mut records = jobs
        .par_iter()
        .map(|&(arm, t)| run_arm_trial(plan, arm, t))
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    Ok(arms
        .iter()
        .map(|&arm| ArmRuns { arm, records: records.by_ref().take(plan.trials).collect() })
        .collect())
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub arm: Arm,
    pub step: usize,
    pub mean_mse: f64,
    pub std_mse: f64,
    pub mean_ll: f64,
    pub std_ll: f64,
}

#[derive(Debug, Clone)]
pub struct ComparisonRun {
    pub plan: TrialPlan,
    pub arms: Vec<ArmRuns>,
}

impl ComparisonRun {
    pub fn arm(&self, arm: Arm) -> Option<&ArmRuns> {
        self.arms.iter().find(|a| a.arm == arm)
    }

    /// Per-step mean/std across trials for every arm. Rows cover steps
    /// `1..=steps`; with zero steps each arm gets one step-0 row of prior metrics.
    pub fn summary(&self) -> Vec<ComparisonRow> {
        let mut rows = Vec::new();
        for runs in &self.arms {
            let steps: Vec<usize> = if self.plan.steps == 0 { vec![0] } else { (1..=self.plan.steps).collect() };
            for step in steps {
                let (mse, ll): (Vec<f64>, Vec<f64>) = runs
                    .records
                    .iter()
                    .map(|r| match step {
                        0 => (r.initial.mse, r.initial.log_loss),
                        s => (r.steps[s - 1].mse, r.steps[s - 1].log_loss),
                    })
                    .unzip();
                let (mean_mse, std_mse) = mean_std(&mse);
                let (mean_ll, std_ll) = mean_std(&ll);
                rows.push(ComparisonRow { arm: runs.arm, step, mean_mse, std_mse, mean_ll, std_ll });
            }
        }
        rows
    }

    /// Final-step `(mean MSE, mean LL)` of an arm.
    pub fn final_means(&self, arm: Arm) -> Option<(f64, f64)> {
        let step = self.plan.steps;
        self.summary().into_iter().find(|r| r.arm == arm && r.step == step).map(|r| (r.mean_mse, r.mean_ll))
    }

    pub fn beta_trace(&self) -> Vec<BetaTraceRow> {
        beta_trace_of(&self.arms)
    }
}

/// All five arms on shared query and noise streams.
pub fn run_strategy_comparison(plan: &TrialPlan) -> Result<ComparisonRun> {
    Ok(ComparisonRun { plan: plan.clone(), arms: run_arms(plan, &Arm::ALL)? })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaTraceRow {
    pub metric: MetricKind,
    pub step: usize,
    pub mean_beta: f64,
    pub std_beta: f64,
}

fn beta_trace_of(arms: &[ArmRuns]) -> Vec<BetaTraceRow> {
    let mut rows = Vec::new();
    for runs in arms.iter().filter(|a| Arm::ACTIVE.contains(&a.arm)) {
        let metric = runs.arm.strategy().1;
        let steps = runs.records.iter().map(|r| r.steps.len()).min().unwrap_or(0);
        for s in 0..steps {
            let betas: Vec<f64> = runs.records.iter().map(|r| r.steps[s].chosen_beta).collect();
            let (mean_beta, std_beta) = mean_std(&betas);
            rows.push(BetaTraceRow { metric, step: s + 1, mean_beta, std_beta });
        }
    }
    rows
}

/// Selected-beta statistics of the two active arms over training.
pub fn run_beta_trace(plan: &TrialPlan) -> Result<Vec<BetaTraceRow>> {
    Ok(beta_trace_of(&run_arms(plan, &Arm::ACTIVE)?))
}

/// Settings for the single-teacher convergence check.
#[derive(Debug, Clone)]
pub struct ConvergencePlan {
    pub trials: usize,
    pub queries: usize,
    pub beta: Rationality,
    pub grid: Arc<WeightGrid>,
    pub seed: u64,
    pub mode: QueryMode,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrial {
    pub trial: u64,
    /// Grid cell nearest to the true weights.
    pub true_cell: usize,
    /// Posterior mass of the true cell after 0, 1, ..., `queries` answers.
    pub true_cell_mass: Vec<f64>,
    /// Mass of the cells that order every asked query the same way as the
    /// true weights. A fully rational teacher cannot separate these cells,
    /// so a final mass below threshold with this above it is the
    /// sign-degenerate plateau rather than slow convergence.
    pub sign_consistent_mass: f64,
}

impl ConvergenceTrial {
    pub fn final_mass(&self) -> f64 {
        *self.true_cell_mass.last().unwrap()
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceResult {
    pub plan: ConvergencePlan,
    pub trials: Vec<ConvergenceTrial>,
}

impl ConvergenceResult {
    pub fn converged(&self) -> usize {
        self.trials.iter().filter(|t| t.final_mass() >= self.plan.threshold).count()
    }

    pub fn fraction_converged(&self) -> f64 {
        self.converged() as f64 / self.trials.len() as f64
    }

    /// Trials stuck below threshold on cells that agree in sign with the truth.
    pub fn sign_degenerate(&self) -> usize {
        self.trials
            .iter()
            .filter(|t| t.final_mass() < self.plan.threshold && t.sign_consistent_mass >= self.plan.threshold)
            .count()
    }
}

fn convergence_trial(plan: &ConvergencePlan, trial: u64) -> Result<ConvergenceTrial> {
    let grid = &plan.grid;
    let w_true = sample_true_weights(grid, &mut trial_stream(plan.seed, trial, Purpose::TrueWeights));
    let cell = grid.nearest_cell(w_true.as_slice())?;
    let mut queries = QuerySource::new(plan.mode.clone(), trial_stream(plan.seed, trial, Purpose::Queries));
    let mut world = SimulatedTeacherWorld::new(w_true.clone(), plan.seed, trial);
    let mut belief = uniform_prior(grid.clone());
    let mut masses = Vec::with_capacity(plan.queries + 1);
    masses.push(belief.mass(cell));
    let side = |phi: &[f64], w: &[f64]| {
        let gap: f64 = phi.iter().zip(w).map(|(a, b)| a * b).sum();
        (gap > 0.0) as i8 - (gap < 0.0) as i8
    };
    let mut consistent = vec![true; grid.cell_count()];
    for _ in 0..plan.queries {
        let q = generate_query(&mut queries);
        let phi = q.diff();
        let answer = world.ask(&q, plan.beta)?;
        belief = belief.update(answer, &phi, plan.beta)?;
        masses.push(belief.mass(cell));
        let truth = side(phi.as_slice(), w_true.as_slice());
        for (c, ok) in grid.centers().zip(consistent.iter_mut()) {
            *ok &= side(phi.as_slice(), c) == truth;
        }
    }
    let sign_consistent_mass = consistent.iter().enumerate().filter(|(_, ok)| **ok).map(|(c, _)| belief.mass(c)).sum();
    Ok(ConvergenceTrial { trial, true_cell: cell, true_cell_mass: masses, sign_consistent_mass })
}

/// Random queries to one simulated teacher, tracking the true cell's mass.
pub fn run_convergence_check(plan: &ConvergencePlan) -> Result<ConvergenceResult> {
    if plan.beta.beta() <= 0.0 {
        return Err(VoiError::InvalidRationality(plan.beta.beta()));
    }
    let trials = (0..plan.trials as u64)
        .into_par_iter()
        .map(|t| convergence_trial(plan, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceResult { plan: plan.clone(), trials })
}
