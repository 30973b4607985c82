//! Item universes and random query generation.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::rng::RandomStream;
use crate::teacher::{FeatureDiff, FeatureVector};

/// Restaurant described by (cleanliness, vegan, spiciness).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestaurantFeatures {
    /// In `[1, 10]`.
    pub cleanliness: f64,
    /// 0 or 1.
    pub vegan: u8,
    /// In `[1, 10]`.
    pub spiciness: f64,
}

impl RestaurantFeatures {
    pub const DIMS: usize = 3;

    /// Cleanliness and spiciness from `U(1, 10)`, vegan a fair coin. With
    /// `integer_ratings` the two ratings are uniform over `1..=10` instead.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, integer_ratings: bool) -> Self {
        let rating = |rng: &mut R| {
            if integer_ratings {
                rng.gen_range(1..=10u8) as f64
            } else {
                rng.gen_range(1.0..=10.0)
            }
        };
        let cleanliness = rating(rng);
        let vegan = rng.gen_range(0..=1u8);
        let spiciness = rating(rng);
        Self { cleanliness, vegan, spiciness }
    }

    pub fn to_features(self) -> FeatureVector {
        FeatureVector(vec![self.cleanliness, self.vegan as f64, self.spiciness])
    }
}

/// A pair of items shown to a teacher.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub phi_i: FeatureVector,
    pub phi_j: FeatureVector,
}

impl Query {
    pub fn diff(&self) -> FeatureDiff {
        FeatureDiff(self.phi_i.0.iter().zip(&self.phi_j.0).map(|(a, b)| a - b).collect())
    }

    /// FNV-1a over the bit patterns of both feature vectors.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for x in self.phi_i.0.iter().chain(&self.phi_j.0) {
            for byte in x.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

/// How queries are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum QueryMode {
    /// Two independent random restaurants.
    RandomRestaurants { integer_ratings: bool },
    /// `phi_i = e_0`, `phi_j = 0`, so the difference is the first unit vector.
    FixedUnitDiff { dims: usize },
    /// Two independent items drawn uniformly from `[0, 1]^dims`.
    UnitCube { dims: usize },
    /// Replays the listed queries in order, cycling.
    Custom(Vec<Query>),
}

impl QueryMode {
    pub fn dims(&self) -> usize {
        match self {
            QueryMode::RandomRestaurants { .. } => RestaurantFeatures::DIMS,
            QueryMode::FixedUnitDiff { dims } | QueryMode::UnitCube { dims } => *dims,
            QueryMode::Custom(qs) => qs.first().map_or(0, |q| q.phi_i.0.len()),
        }
    }

    /// Produces query number `index`, drawing from `rng` where the mode is random.
    pub fn generate<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> Query {
        match self {
            QueryMode::RandomRestaurants { integer_ratings } => Query {
                phi_i: RestaurantFeatures::sample(rng, *integer_ratings).to_features(),
                phi_j: RestaurantFeatures::sample(rng, *integer_ratings).to_features(),
            },
            QueryMode::FixedUnitDiff { dims } => {
                let mut phi_i = vec![0.0; *dims];
                phi_i[0] = 1.0;
                Query { phi_i: FeatureVector(phi_i), phi_j: FeatureVector(vec![0.0; *dims]) }
            }
            QueryMode::UnitCube { dims } => {
                let phi_i = (0..*dims).map(|_| rng.gen::<f64>()).collect();
                let phi_j = (0..*dims).map(|_| rng.gen::<f64>()).collect();
                Query { phi_i: FeatureVector(phi_i), phi_j: FeatureVector(phi_j) }
            }
            QueryMode::Custom(qs) => qs[index % qs.len()].clone(),
        }
    }
}

/// A query mode bound to its own random stream.
#[derive(Debug, Clone)]
pub struct QuerySource {
    mode: QueryMode,
    rng: RandomStream,
    issued: usize,
}

impl QuerySource {
    /// # Panics
    /// If `mode` is `Custom` with no queries.
    pub fn new(mode: QueryMode, rng: RandomStream) -> Self {
        assert!(!matches!(&mode, QueryMode::Custom(q) if q.is_empty()), "custom query list is empty");
        Self { mode, rng, issued: 0 }
    }

    pub fn mode(&self) -> &QueryMode {
        &self.mode
    }

    pub fn issued(&self) -> usize {
        self.issued
    }
}

/// Next query from `source`; deterministic given the source's seed.
pub fn generate_query(source: &mut QuerySource) -> Query {
    let q = source.mode.generate(source.issued, &mut source.rng);
    source.issued += 1;
    q
}
