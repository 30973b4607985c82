//! Bayesian reward learning from preference comparisons answered by several
//! Boltzmann-rational teachers, with greedy value-of-information teacher
//! selection.
//!
//! Beliefs live on a regular grid over the weight space. A teacher with
//! rationality `beta` prefers item `i` over `j` with probability
//! `sigmoid(beta * w . (phi_i - phi_j))`; each answer reweights the grid by
//! that likelihood. [`voi::select_teacher`] picks the teacher whose answer is
//! expected to leave the lowest mean squared error or log loss, and
//! [`learning::learn_reward_model`] runs the full query/select/update loop.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod belief;
pub mod domain;
pub mod error;
pub mod grid;
pub mod learning;
pub mod math;
pub mod rng;
pub mod teacher;
pub mod voi;

#[cfg(any(test, feature = "enumeration-oracle"))]
pub mod oracle;

pub use belief::{uniform_prior, Belief, MetricKind};
pub use domain::{generate_query, Query, QueryMode, QuerySource, RestaurantFeatures};
pub use error::{Result, VoiError};
pub use grid::{Axis, WeightGrid, WeightVector};
pub use learning::{learn_reward_model, LoopConfig, SimulatedTeacherWorld, StepRecord, Strategy, TrialRecord};
pub use rng::RandomStream;
pub use teacher::{preference_prob, reward, sample_preference, FeatureDiff, FeatureVector, Preference, Rationality};
pub use voi::{expected_log_loss, expected_mse, f_i, select_teacher, ExpectedMetricReport, TeacherPool};
