//! Expected posterior metrics and greedy teacher selection.
//!
//! For a query with feature difference `phi` and a teacher of rationality
//! `beta`, the unnormalized posterior for answer `I` is
//! `f_I(w) = P(w) * sigmoid(I * beta * w . phi)` and `Z_I = sum_w f_I(w)` is
//! the predictive probability of that answer. The expected metrics below are
//! closed forms in `f_I` and `Z_I`; answers with `Z_I = 0` contribute nothing.

use alloc::vec::Vec;
use libm::{exp, log};

use crate::belief::{Belief, MetricKind};
use crate::error::{Result, VoiError};
use crate::math::{dot, sigmoid};
use crate::teacher::{FeatureDiff, Preference, Rationality};

/// Ordered list of available teachers; the index identifies the teacher.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherPool(Vec<Rationality>);

impl TeacherPool {
    pub fn new(betas: Vec<Rationality>) -> Result<Self> {
        if betas.is_empty() {
            return Err(VoiError::EmptyPool);
        }
        Ok(Self(betas))
    }

    pub fn from_betas(betas: &[f64]) -> Result<Self> {
        Self::new(betas.iter().map(|&b| Rationality::new(b)).collect::<Result<_>>()?)
    }

    /// `count` evenly spaced values from `lower` to `upper` inclusive.
    pub fn linspace(lower: f64, upper: f64, count: usize) -> Result<Self> {
        Self::from_betas(&linspace(lower, upper, count))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> Rationality {
        self.0[index]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Rationality> + '_ {
        self.0.iter().copied()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.0.iter().map(|b| b.beta()).collect()
    }

    /// Index of the most rational teacher (first one on ties).
    pub fn max_index(&self) -> usize {
        let mut best = 0;
        for (i, b) in self.0.iter().enumerate() {
            if b.beta() > self.0[best].beta() {
                best = i;
            }
        }
        best
    }

    /// Index of the teacher whose beta is closest to `target` (first one on ties).
    pub fn nearest_index(&self, target: f64) -> usize {
        let mut best = 0;
        for (i, b) in self.0.iter().enumerate() {
            if (b.beta() - target).abs() < (self.0[best].beta() - target).abs() {
                best = i;
            }
        }
        best
    }
}

/// `count` evenly spaced values from `lower` to `upper` inclusive; a single
/// value is `lower`.
pub fn linspace(lower: f64, upper: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lower],
        n => {
            let step = (upper - lower) / (n - 1) as f64;
            (0..n).map(|k| if k + 1 == n { upper } else { lower + k as f64 * step }).collect()
        }
    }
}

/// Expected metric of every teacher in a pool and the chosen one.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedMetricReport {
    pub metric: MetricKind,
    pub per_beta: Vec<(Rationality, f64)>,
    pub chosen_index: usize,
}

impl ExpectedMetricReport {
    pub fn chosen_beta(&self) -> Rationality {
        self.per_beta[self.chosen_index].0
    }

    pub fn chosen_value(&self) -> f64 {
        self.per_beta[self.chosen_index].1
    }
}

/// Per-cell values of `f_I(w) = P(w) * P(I | w)`.
pub fn f_i(belief: &Belief, phi_diff: &FeatureDiff, beta: Rationality, pref: Preference) -> Result<Vec<f64>> {
    let grid = belief.grid();
    grid.check_dims(phi_diff.dims())?;
    let scale = pref.sign() * beta.beta();
    Ok(grid
        .centers()
        .zip(belief.log_mass())
        .map(|(c, &l)| exp(l) * sigmoid(scale * dot(c, phi_diff.as_slice())))
        .collect())
}

/// Expected mean squared error of the one-step posterior.
pub fn expected_mse(belief: &Belief, phi_diff: &FeatureDiff, beta: Rationality) -> Result<f64> {
    Ok(QueryEvaluator::new(belief, phi_diff)?.expected_mse(beta))
}

/// Expected log loss of the one-step posterior.
pub fn expected_log_loss(belief: &Belief, phi_diff: &FeatureDiff, beta: Rationality) -> Result<f64> {
    Ok(QueryEvaluator::new(belief, phi_diff)?.expected_log_loss(beta))
}

/// Evaluates the expected metric for every teacher and picks the minimizer.
/// Exact ties go to the smaller beta, then to the lower index.
pub fn select_teacher(
    belief: &Belief,
    phi_diff: &FeatureDiff,
    pool: &TeacherPool,
    metric: MetricKind,
) -> Result<ExpectedMetricReport> {
    let eval = QueryEvaluator::new(belief, phi_diff)?;
    let per_beta: Vec<_> = pool.iter().map(|b| (b, eval.expected(metric, b))).collect();
    let chosen_index = argmin_small_beta(&per_beta);
    Ok(ExpectedMetricReport { metric, per_beta, chosen_index })
}

pub(crate) fn argmin_small_beta(values: &[(Rationality, f64)]) -> usize {
    let mut best = 0;
    for (i, &(b, v)) in values.iter().enumerate().skip(1) {
        let (bb, bv) = values[best];
        if v < bv || (v == bv && b.beta() < bb.beta()) {
            best = i;
        }
    }
    best
}

/// Caches the per-cell quantities shared by every teacher for one
/// (belief, query) pair.
pub struct QueryEvaluator<'a> {
    belief: &'a Belief,
    masses: Vec<f64>,
    gaps: Vec<f64>,
}

impl<'a> QueryEvaluator<'a> {
    pub fn new(belief: &'a Belief, phi_diff: &FeatureDiff) -> Result<Self> {
        let grid = belief.grid();
        grid.check_dims(phi_diff.dims())?;
        let masses = belief.masses();
        let gaps = grid.centers().map(|c| dot(c, phi_diff.as_slice())).collect();
        Ok(Self { belief, masses, gaps })
    }

    pub fn expected(&self, metric: MetricKind, beta: Rationality) -> f64 {
        match metric {
            MetricKind::MeanSquaredError => self.expected_mse(beta),
            MetricKind::LogLoss => self.expected_log_loss(beta),
        }
    }

    /// `sum_I (2 / Z_I) * (Z_I * sum f_I |w|^2 - |sum f_I w|^2)`.
    ///
    /// The bracket equals `Z_I * sum f_I |w - c|^2 - |sum f_I (w - c)|^2` for
    /// any shift `c`; it is evaluated around each answer's posterior mean.
    pub fn expected_mse(&self, beta: Rationality) -> f64 {
        let grid = self.belief.grid();
        let d = grid.dims();
        let centers = grid.flat_centers();
        let b = beta.beta();
        let f = self.answer_masses(b);
        let mut z = [0.0f64; 2];
        let mut mean = alloc::vec![0.0f64; 2 * d];
        for (cell, pair) in f.chunks_exact(2).enumerate() {
            let w = &centers[cell * d..(cell + 1) * d];
            for k in 0..2 {
                z[k] += pair[k];
                for (acc, wi) in mean[k * d..(k + 1) * d].iter_mut().zip(w) {
                    *acc += pair[k] * wi;
                }
            }
        }
        for k in 0..2 {
            if z[k] > 0.0 {
                for m in &mut mean[k * d..(k + 1) * d] {
                    *m /= z[k];
                }
            }
        }
        let mut spread = [0.0f64; 2];
        let mut drift = alloc::vec![0.0f64; 2 * d];
        for (cell, pair) in f.chunks_exact(2).enumerate() {
            let w = &centers[cell * d..(cell + 1) * d];
            for k in 0..2 {
                if pair[k] == 0.0 {
                    continue;
                }
                let mu = &mean[k * d..(k + 1) * d];
                let acc = &mut drift[k * d..(k + 1) * d];
                let mut sq = 0.0;
                for ((a, wi), mi) in acc.iter_mut().zip(w).zip(mu) {
                    let dev = wi - mi;
                    sq += dev * dev;
                    *a += pair[k] * dev;
                }
                spread[k] += pair[k] * sq;
            }
        }
        (0..2)
            .filter(|&k| z[k] > 0.0)
            .map(|k| {
                let r = &drift[k * d..(k + 1) * d];
                2.0 * (spread[k] - dot(r, r) / z[k]).max(0.0)
            })
            .sum()
    }

    /// Interleaved `[f_+1(w), f_-1(w)]` for every cell.
    fn answer_masses(&self, beta: f64) -> Vec<f64> {
        let mut f = Vec::with_capacity(2 * self.masses.len());
        for (&p, &gap) in self.masses.iter().zip(&self.gaps) {
            let x = beta * gap;
            let e = exp(-x.abs());
            let small = e / (1.0 + e);
            let large = 1.0 - small;
            if x >= 0.0 {
                f.extend_from_slice(&[p * large, p * small]);
            } else {
                f.extend_from_slice(&[p * small, p * large]);
            }
        }
        f
    }

    /// `-sum_I sum_w f_I(w) * log(f_I(w) / Z_I)`, with `0 log 0 = 0`.
    pub fn expected_log_loss(&self, beta: Rationality) -> f64 {
        let f = self.answer_masses(beta.beta());
        let mut z = [0.0f64; 2];
        for pair in f.chunks_exact(2) {
            z[0] += pair[0];
            z[1] += pair[1];
        }
        let mut total = 0.0;
        for pair in f.chunks_exact(2) {
            for k in 0..2 {
                if pair[k] > 0.0 {
                    total -= pair[k] * log(pair[k] / z[k]);
                }
            }
        }
        total
    }
}
