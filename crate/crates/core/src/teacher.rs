//! Boltzmann-rational choice model and simulated teachers.

use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Result, VoiError};
use crate::grid::WeightVector;
use crate::math::{dot, sigmoid};

/// Inverse temperature of a Boltzmann-rational teacher.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Rationality(f64);

impl Rationality {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta >= 0.0 {
            Ok(Self(beta))
        } else {
            Err(VoiError::InvalidRationality(beta))
        }
    }

    pub fn beta(self) -> f64 {
        self.0
    }
}

/// Which item of a pair the teacher picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preference {
    /// `I = +1`: item `i` preferred over item `j`.
    PrefersI,
    /// `I = -1`: item `j` preferred over item `i`.
    PrefersJ,
}

impl Preference {
    pub const BOTH: [Preference; 2] = [Preference::PrefersI, Preference::PrefersJ];

    pub fn sign(self) -> f64 {
        match self {
            Preference::PrefersI => 1.0,
            Preference::PrefersJ => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Preference::PrefersI => 1,
            Preference::PrefersJ => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Preference::PrefersI => Preference::PrefersJ,
            Preference::PrefersJ => Preference::PrefersI,
        }
    }
}

/// Feature vector describing a single item.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Difference `phi_i - phi_j` between the items of a query.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDiff(pub Vec<f64>);

impl FeatureDiff {
    pub fn between(phi_i: &FeatureVector, phi_j: &FeatureVector) -> Result<Self> {
        if phi_i.0.len() != phi_j.0.len() {
            return Err(VoiError::DimensionMismatch { expected: phi_i.0.len(), actual: phi_j.0.len() });
        }
        Ok(Self(phi_i.0.iter().zip(&phi_j.0).map(|(a, b)| a - b).collect()))
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }
}

/// Linear reward `w . phi`.
pub fn reward(w: &WeightVector, phi: &FeatureVector) -> Result<f64> {
    if w.dims() != phi.0.len() {
        return Err(VoiError::DimensionMismatch { expected: w.dims(), actual: phi.0.len() });
    }
    Ok(dot(w.as_slice(), phi.as_slice()))
}

/// Probability that a teacher with rationality `beta` answers `pref` when the
/// true weights are `w`.
pub fn preference_prob(
    w: &WeightVector,
    phi_diff: &FeatureDiff,
    beta: Rationality,
    pref: Preference,
) -> Result<f64> {
    if w.dims() != phi_diff.dims() {
        return Err(VoiError::DimensionMismatch { expected: w.dims(), actual: phi_diff.dims() });
    }
    Ok(choice_prob(dot(w.as_slice(), phi_diff.as_slice()), beta.beta(), pref))
}

#[inline]
pub(crate) fn choice_prob(reward_gap: f64, beta: f64, pref: Preference) -> f64 {
    sigmoid(pref.sign() * (beta * reward_gap))
}

/// Answers a query given one uniform draw `u` in `[0, 1)`: `PrefersI` iff `u < P(+1)`.
///
/// Feeding several teachers the same `u` couples their answers on common randomness.
pub fn answer_with_uniform(
    w_true: &WeightVector,
    phi_diff: &FeatureDiff,
    beta: Rationality,
    u: f64,
) -> Result<Preference> {
    let p = preference_prob(w_true, phi_diff, beta, Preference::PrefersI)?;
    Ok(if u < p { Preference::PrefersI } else { Preference::PrefersJ })
}

/// Draws a stochastic answer from the teacher.
pub fn sample_preference<R: Rng + ?Sized>(
    w_true: &WeightVector,
    phi_diff: &FeatureDiff,
    beta: Rationality,
    rng: &mut R,
) -> Result<Preference> {
    let u: f64 = rng.gen();
    answer_with_uniform(w_true, phi_diff, beta, u)
}
