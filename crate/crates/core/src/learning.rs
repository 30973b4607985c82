//! Greedy active reward learning loop.

use alloc::vec::Vec;
use rand::Rng;

use crate::belief::{Belief, MetricKind};
use crate::domain::{generate_query, QuerySource};
use crate::error::{Result, VoiError};
use crate::grid::{WeightGrid, WeightVector};
use crate::rng::{trial_stream, Purpose, RandomStream};
use crate::teacher::{answer_with_uniform, Preference, Rationality};
use crate::voi::{select_teacher, TeacherPool};

/// Rule for picking the teacher at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Minimize the configured expected metric.
    ExpectedMetric,
    LargestBeta,
    /// Uniformly random teacher from the pool.
    RandomBeta,
    /// The teacher with beta = 1.
    FixedBetaOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub metric: MetricKind,
    /// Stop once the belief entropy (nats) is at or below this value.
    pub entropy_threshold: f64,
    pub max_steps: usize,
    pub strategy: Strategy,
    /// For `FixedBetaOne` on a pool without an exact beta = 1, use the
    /// nearest teacher instead of failing.
    pub nearest_unit_fallback: bool,
}

impl LoopConfig {
    pub fn new(metric: MetricKind, strategy: Strategy, entropy_threshold: f64, max_steps: usize) -> Result<Self> {
        let cfg = Self { metric, entropy_threshold, max_steps, strategy, nearest_unit_fallback: true };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entropy_threshold.is_nan() || self.entropy_threshold < 0.0 {
            return Err(VoiError::InvalidConfig("entropy threshold must be non-negative"));
        }
        if self.max_steps == 0 {
            return Err(VoiError::InvalidConfig("max_steps must be at least 1"));
        }
        Ok(())
    }
}

/// Metrics of a belief against the true weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub mse: f64,
    pub log_loss: f64,
    pub entropy: f64,
}

impl Snapshot {
    pub fn of(belief: &Belief, w_true: &WeightVector) -> Result<Self> {
        Ok(Self { mse: belief.mse(w_true)?, log_loss: belief.log_loss(w_true)?, entropy: belief.entropy() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based.
    pub step: usize,
    pub chosen_beta: f64,
    pub preference: Preference,
    pub mse: f64,
    pub log_loss: f64,
    pub entropy: f64,
    pub query_fingerprint: u64,
}

/// Trace of one learning run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub trial: u64,
    pub w_true: WeightVector,
    /// Metrics of the prior, before any query.
    pub initial: Snapshot,
    pub steps: Vec<StepRecord>,
    pub final_belief: Belief,
}

/// Hidden true weights plus the teacher-noise stream.
///
/// Each step consumes exactly one uniform draw whichever teacher is asked,
/// so runs that differ only in teacher selection see the same noise.
#[derive(Debug, Clone)]
pub struct SimulatedTeacherWorld {
    w_true: WeightVector,
    noise: RandomStream,
    seed: u64,
    trial: u64,
}

impl SimulatedTeacherWorld {
    pub fn new(w_true: WeightVector, seed: u64, trial: u64) -> Self {
        Self { w_true, noise: trial_stream(seed, trial, Purpose::TeacherNoise), seed, trial }
    }

    pub fn w_true(&self) -> &WeightVector {
        &self.w_true
    }

    pub fn ask(&mut self, query: &crate::domain::Query, beta: Rationality) -> Result<Preference> {
        let u: f64 = self.noise.gen();
        answer_with_uniform(&self.w_true, &query.diff(), beta, u)
    }
}

/// Cell center drawn uniformly from the grid.
pub fn sample_true_weights<R: Rng + ?Sized>(grid: &WeightGrid, rng: &mut R) -> WeightVector {
    let cell = rng.gen_range(0..grid.cell_count());
    WeightVector::from(grid.center(cell))
}

fn unit_teacher(pool: &TeacherPool, fallback: bool) -> Result<usize> {
    let idx = pool.nearest_index(1.0);
    if fallback || (pool.get(idx).beta() - 1.0).abs() <= 1e-9 {
        Ok(idx)
    } else {
        Err(VoiError::NoUnitRationalityTeacher)
    }
}

/// Runs query, selection, answer and update until the entropy threshold or
/// the step budget is reached. `rng` is only consumed by `RandomBeta`.
pub fn learn_reward_model(
    prior: &Belief,
    pool: &TeacherPool,
    config: &LoopConfig,
    queries: &mut QuerySource,
    world: &mut SimulatedTeacherWorld,
    rng: &mut RandomStream,
) -> Result<TrialRecord> {
    config.validate()?;
    let grid = prior.grid();
    grid.check_dims(world.w_true.dims())?;
    grid.check_dims(queries.mode().dims())?;
    let fixed = match config.strategy {
        Strategy::LargestBeta => Some(pool.max_index()),
        Strategy::FixedBetaOne => Some(unit_teacher(pool, config.nearest_unit_fallback)?),
        Strategy::ExpectedMetric | Strategy::RandomBeta => None,
    };

    let initial = Snapshot::of(prior, &world.w_true)?;
    let mut belief = prior.clone();
    let mut steps = Vec::new();
    let mut entropy = initial.entropy;
    while entropy > config.entropy_threshold && steps.len() < config.max_steps {
        let query = generate_query(queries);
        let phi = query.diff();
        let teacher = match (fixed, config.strategy) {
            (Some(i), _) => i,
            (None, Strategy::RandomBeta) => rng.gen_range(0..pool.len()),
            _ => select_teacher(&belief, &phi, pool, config.metric)?.chosen_index,
        };
        let beta = pool.get(teacher);
        let preference = world.ask(&query, beta)?;
        belief = belief.update(preference, &phi, beta)?;
        let snap = Snapshot::of(&belief, &world.w_true)?;
        entropy = snap.entropy;
        steps.push(StepRecord {
            step: steps.len() + 1,
            chosen_beta: beta.beta(),
            preference,
            mse: snap.mse,
            log_loss: snap.log_loss,
            entropy: snap.entropy,
            query_fingerprint: query.fingerprint(),
        });
    }
    Ok(TrialRecord {
        seed: world.seed,
        trial: world.trial,
        w_true: world.w_true.clone(),
        initial,
        steps,
        final_belief: belief,
    })
}
