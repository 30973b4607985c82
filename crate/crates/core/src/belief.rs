//! Discretized belief over reward weights, stored as log cell masses.

use alloc::sync::Arc;
use alloc::vec::Vec;
use libm::exp;

use crate::error::{Result, VoiError};
use crate::grid::{WeightGrid, WeightVector};
use crate::math::{dot, log_sigmoid, log_sum_exp};
use crate::teacher::{FeatureDiff, Preference, Rationality};

/// Belief-error metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    MeanSquaredError,
    LogLoss,
}

impl MetricKind {
    pub fn short_name(self) -> &'static str {
        match self {
            MetricKind::MeanSquaredError => "mse",
            MetricKind::LogLoss => "ll",
        }
    }
}

/// Normalized probability mass over the cells of a [`WeightGrid`].
///
/// Masses are cell masses, not densities: the log loss of a belief is the
/// negative log mass of the cell holding the true weights, which differs from
/// the density version by the log cell volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    grid: Arc<WeightGrid>,
    log_mass: Vec<f64>,
}

/// Uniform belief over every cell of `grid`.
pub fn uniform_prior(grid: Arc<WeightGrid>) -> Belief {
    let n = grid.cell_count();
    let lm = -libm::log(n as f64);
    Belief { log_mass: alloc::vec![lm; n], grid }
}

impl Belief {
    /// Normalizes arbitrary log weights; `-inf` entries become zero-mass cells.
    pub fn from_log_weights(grid: Arc<WeightGrid>, mut log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.len() != grid.cell_count() {
            return Err(VoiError::DimensionMismatch { expected: grid.cell_count(), actual: log_weights.len() });
        }
        if log_weights.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(VoiError::InvalidMasses);
        }
        let z = log_sum_exp(&log_weights);
        if z == f64::NEG_INFINITY {
            return Err(VoiError::DegenerateBelief);
        }
        for v in &mut log_weights {
            *v -= z;
        }
        Ok(Self { grid, log_mass: log_weights })
    }

    /// Normalizes non-negative (not necessarily summing to one) masses.
    pub fn from_masses(grid: Arc<WeightGrid>, masses: &[f64]) -> Result<Self> {
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(VoiError::InvalidMasses);
        }
        let logs = masses.iter().map(|&m| libm::log(m)).collect();
        Self::from_log_weights(grid, logs)
    }

    pub fn grid(&self) -> &Arc<WeightGrid> {
        &self.grid
    }

    pub fn log_mass(&self) -> &[f64] {
        &self.log_mass
    }

    pub fn mass(&self, cell: usize) -> f64 {
        exp(self.log_mass[cell])
    }

    pub fn masses(&self) -> Vec<f64> {
        self.log_mass.iter().map(|&l| exp(l)).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.log_mass.iter().map(|&l| exp(l)).sum()
    }

    /// Posterior after observing `pref` from a teacher with rationality `beta`.
    pub fn update(&self, pref: Preference, phi_diff: &FeatureDiff, beta: Rationality) -> Result<Belief> {
        self.grid.check_dims(phi_diff.dims())?;
        if beta.beta() == 0.0 {
            return Ok(self.clone());
        }
        let scale = pref.sign() * beta.beta();
        let phi = phi_diff.as_slice();
        let logs = self
            .grid
            .centers()
            .zip(&self.log_mass)
            .map(|(c, &lm)| lm + log_sigmoid(scale * dot(c, phi)))
            .collect();
        Self::from_log_weights(self.grid.clone(), logs)
    }

    /// Shannon entropy of the cell masses, in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .log_mass
            .iter()
            .filter(|l| l.is_finite())
            .map(|&l| exp(l) * l)
            .sum::<f64>()
    }

    /// Expected squared distance between a cell center drawn from the belief and `w_true`.
    pub fn mse(&self, w_true: &WeightVector) -> Result<f64> {
        self.grid.check_dims(w_true.dims())?;
        let t = w_true.as_slice();
        Ok(self
            .grid
            .centers()
            .zip(&self.log_mass)
            .map(|(c, &l)| {
                let d2: f64 = c.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum();
                exp(l) * d2
            })
            .sum())
    }

    /// Negative log mass of the cell nearest to `w_true`.
    pub fn log_loss(&self, w_true: &WeightVector) -> Result<f64> {
        let cell = self.grid.nearest_cell(w_true.as_slice())?;
        let l = self.log_mass[cell];
        if l == f64::NEG_INFINITY {
            return Err(VoiError::OutOfSupport { cell });
        }
        Ok(-l)
    }

    pub fn metric(&self, kind: MetricKind, w_true: &WeightVector) -> Result<f64> {
        match kind {
            MetricKind::MeanSquaredError => self.mse(w_true),
            MetricKind::LogLoss => self.log_loss(w_true),
        }
    }

    /// Posterior mean of the weights.
    pub fn mean(&self) -> WeightVector {
        let mut m = alloc::vec![0.0; self.grid.dims()];
        for (c, &l) in self.grid.centers().zip(&self.log_mass) {
            let p = exp(l);
            for (mi, ci) in m.iter_mut().zip(c) {
                *mi += p * ci;
            }
        }
        WeightVector(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_cell() -> Arc<WeightGrid> {
        Arc::new(WeightGrid::cube(1, -1.0, 1.0, 2).unwrap())
    }

    fn wv(x: f64) -> WeightVector {
        WeightVector(vec![x])
    }

    #[test]
    fn uniform_prior_masses() {
        let g = Arc::new(WeightGrid::cube(3, 0.0, 1.0, 2).unwrap());
        let b = uniform_prior(g);
        assert!(b.masses().iter().all(|m| (m - 0.125).abs() < 1e-15));
        assert!((b.entropy() - 8f64.ln()).abs() < 1e-12);
        assert!((b.entropy() - 2.0794).abs() < 1e-4);

        let one = uniform_prior(Arc::new(WeightGrid::cube(1, 2.0, 2.0, 1).unwrap()));
        assert_eq!(one.masses(), vec![1.0]);

        let big = uniform_prior(Arc::new(WeightGrid::cube(3, -10.0, 10.0, 21).unwrap()));
        assert!((big.mass(1234) - 1.0 / 9261.0).abs() < 1e-18);
        assert!((big.entropy() - 9.1335).abs() < 1e-4);
        assert!((big.total_mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn update_two_cell_example() {
        let prior = uniform_prior(two_cell());
        let beta = Rationality::new(1.0).unwrap();
        let d = FeatureDiff(vec![1.0]);
        let post = prior.update(Preference::PrefersI, &d, beta).unwrap();
        let m = post.masses();
        assert!((m[0] - 0.26894).abs() < 1e-5 && (m[1] - 0.73106).abs() < 1e-5, "{m:?}");
        let post = prior.update(Preference::PrefersJ, &d, beta).unwrap();
        let m = post.masses();
        assert!((m[0] - 0.73106).abs() < 1e-5 && (m[1] - 0.26894).abs() < 1e-5, "{m:?}");
        // input is untouched
        assert_eq!(prior.masses(), vec![0.5, 0.5]);
    }

    #[test]
    fn zero_beta_update_is_identity() {
        let g = Arc::new(WeightGrid::cube(2, -3.0, 3.0, 4).unwrap());
        let prior = Belief::from_masses(g, &(1..=16).map(|k| k as f64).collect::<Vec<_>>()).unwrap();
        let d = FeatureDiff(vec![0.4, -2.0]);
        for p in Preference::BOTH {
            let post = prior.update(p, &d, Rationality::new(0.0).unwrap()).unwrap();
            assert_eq!(post, prior);
        }
    }

    #[test]
    fn update_rejects_wrong_dimension() {
        let prior = uniform_prior(two_cell());
        let err = prior.update(Preference::PrefersI, &FeatureDiff(vec![1.0, 0.0]), Rationality::new(1.0).unwrap());
        assert!(matches!(err, Err(VoiError::DimensionMismatch { .. })));
    }

    #[test]
    fn degenerate_posterior_is_an_error() {
        assert_eq!(
            Belief::from_log_weights(two_cell(), vec![f64::NEG_INFINITY; 2]),
            Err(VoiError::DegenerateBelief)
        );
        assert_eq!(Belief::from_masses(two_cell(), &[0.0, 0.0]), Err(VoiError::DegenerateBelief));
        assert_eq!(Belief::from_masses(two_cell(), &[-1.0, 2.0]), Err(VoiError::InvalidMasses));
    }

    #[test]
    fn extreme_likelihoods_stay_normalized() {
        let g = Arc::new(WeightGrid::cube(3, -10.0, 10.0, 5).unwrap());
        let mut b = uniform_prior(g);
        let d = FeatureDiff(vec![10.0, -10.0, 10.0]);
        for _ in 0..50 {
            b = b.update(Preference::PrefersI, &d, Rationality::new(4.0).unwrap()).unwrap();
            assert!((b.total_mass() - 1.0).abs() < 1e-10);
            assert!(b.log_mass().iter().all(|l| !l.is_nan()));
        }
    }

    #[test]
    fn entropy_examples() {
        let g = two_cell();
        let point = Belief::from_masses(g.clone(), &[0.0, 1.0]).unwrap();
        assert_eq!(point.entropy(), 0.0);
        let b = Belief::from_masses(g, &[0.73106, 0.26894]).unwrap();
        assert!((b.entropy() - 0.5823).abs() < 1e-3, "{}", b.entropy());
    }

    #[test]
    fn mse_examples() {
        let g = two_cell();
        let u = uniform_prior(g.clone());
        assert!((u.mse(&wv(1.0)).unwrap() - 2.0).abs() < 1e-15);
        assert!((u.mse(&wv(0.0)).unwrap() - 1.0).abs() < 1e-15);
        let point = Belief::from_masses(g, &[0.0, 1.0]).unwrap();
        assert_eq!(point.mse(&wv(1.0)).unwrap(), 0.0);
        assert!(u.mse(&WeightVector(vec![0.0, 1.0])).is_err());
    }

    #[test]
    fn log_loss_examples() {
        let g = Arc::new(WeightGrid::cube(2, 0.0, 1.0, 3).unwrap());
        let u = uniform_prior(g);
        assert!((u.log_loss(&WeightVector(vec![0.5, 0.5])).unwrap() - 9f64.ln()).abs() < 1e-12);

        let b = Belief::from_masses(two_cell(), &[0.73106, 0.26894]).unwrap();
        assert!((b.log_loss(&wv(-1.0)).unwrap() - 0.3133).abs() < 1e-4);
        // nearest-cell lookup for off-center weights
        assert!((b.log_loss(&wv(-0.2)).unwrap() - 0.3133).abs() < 1e-4);

        let point = Belief::from_masses(two_cell(), &[0.0, 1.0]).unwrap();
        assert_eq!(point.log_loss(&wv(1.0)).unwrap(), 0.0);
        assert_eq!(point.log_loss(&wv(-1.0)), Err(VoiError::OutOfSupport { cell: 0 }));
    }

    #[test]
    fn mean_of_uniform_is_center() {
        let b = uniform_prior(Arc::new(WeightGrid::cube(2, -10.0, 10.0, 11).unwrap()));
        assert!(b.mean().as_slice().iter().all(|m| m.abs() < 1e-12));
    }
}
