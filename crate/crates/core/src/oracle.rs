//! Brute-force reference evaluations, compiled only for tests.
//!
//! Everything here works on plain masses and center lists with the
//! textbook formulas, sharing no code with the closed forms in [`crate::voi`]
//! or the log-space update in [`crate::belief`].

use alloc::vec::Vec;
use libm::{exp, log};

/// Metric evaluated by the enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMetric {
    SquaredError,
    LogLoss,
}

/// `1 / (1 + exp(-sign * beta * w . phi))`.
pub fn likelihood(w: &[f64], phi: &[f64], beta: f64, sign: f64) -> f64 {
    let gap: f64 = w.iter().zip(phi).map(|(a, b)| a * b).sum();
    1.0 / (1.0 + exp(-sign * beta * gap))
}

/// Posterior masses after answer `sign`, normalized by direct summation.
pub fn posterior(masses: &[f64], centers: &[Vec<f64>], phi: &[f64], beta: f64, sign: f64) -> Vec<f64> {
    let joint: Vec<f64> = masses
        .iter()
        .zip(centers)
        .map(|(p, c)| p * likelihood(c, phi, beta, sign))
        .collect();
    let z: f64 = joint.iter().sum();
    joint.iter().map(|j| if z > 0.0 { j / z } else { 0.0 }).collect()
}

/// `sum_w P(w) sum_I P(I | w) M(P(. | I), w)` by explicit enumeration; the
/// squared-error form is the O(N^2) double sum.
pub fn expected_metric(
    masses: &[f64],
    centers: &[Vec<f64>],
    phi: &[f64],
    beta: f64,
    metric: OracleMetric,
) -> f64 {
    let posts = [posterior(masses, centers, phi, beta, 1.0), posterior(masses, centers, phi, beta, -1.0)];
    let mut total = 0.0;
    for (i, (p, w)) in masses.iter().zip(centers).enumerate() {
        if *p == 0.0 {
            continue;
        }
        for (post, sign) in posts.iter().zip([1.0, -1.0]) {
            let answer = likelihood(w, phi, beta, sign);
            if answer == 0.0 {
                continue;
            }
            let m = match metric {
                OracleMetric::SquaredError => post
                    .iter()
                    .zip(centers)
                    .map(|(q, c)| q * c.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                    .sum(),
                OracleMetric::LogLoss => -log(post[i]),
            };
            total += p * answer * m;
        }
    }
    total
}

/// `-sum m log m` over positive masses.
pub fn entropy(masses: &[f64]) -> f64 {
    -masses.iter().filter(|m| **m > 0.0).map(|m| m * log(*m)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::Belief;
    use crate::grid::{Axis, WeightGrid};
    use crate::teacher::{FeatureDiff, Rationality};
    use crate::voi::{argmin_small_beta, QueryEvaluator};
    use alloc::sync::Arc;
    use alloc::vec;
    use proptest::prelude::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    prop_compose! {
        fn arb_case()(dims in 1usize..=3)
            (points in proptest::collection::vec(1usize..=4, dims),
             lower in -10.0f64..0.0,
             width in 0.5f64..20.0,
             phi in proptest::collection::vec(-3.0f64..3.0, dims),
             beta in 0.0f64..5.0,
             seed in any::<u64>())
            -> (Arc<WeightGrid>, Vec<f64>, Vec<f64>, f64)
        {
            let axes = points.iter().map(|&p| Axis::new(lower, lower + width, p + 1).unwrap()).collect();
            let grid = Arc::new(WeightGrid::new(axes).unwrap());
            let mut state = seed | 1;
            let masses = (0..grid.cell_count()).map(|_| {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                let u = (state >> 11) as f64 / (1u64 << 53) as f64;
                if u < 0.1 { 0.0 } else { u }
            }).collect::<Vec<_>>();
            (grid, masses, phi, beta)
        }
    }

    proptest! {
        #[test]
        fn closed_forms_match_enumeration((grid, masses, phi, beta) in arb_case()) {
            prop_assume!(masses.iter().any(|m| *m > 0.0));
            let belief = Belief::from_masses(grid.clone(), &masses).unwrap();
            let m = belief.masses();
            let centers: Vec<Vec<f64>> = grid.centers().map(|c| c.to_vec()).collect();
            let eval = QueryEvaluator::new(&belief, &FeatureDiff(phi.clone())).unwrap();
            let b = Rationality::new(beta).unwrap();
            let mse = eval.expected_mse(b);
            let mse_ref = expected_metric(&m, &centers, &phi, beta, OracleMetric::SquaredError);
            prop_assert!(rel_close(mse, mse_ref, 1e-9) || (mse - mse_ref).abs() < 1e-14, "{} vs {}", mse, mse_ref);
            let ll = eval.expected_log_loss(b);
            let ll_ref = expected_metric(&m, &centers, &phi, beta, OracleMetric::LogLoss);
            prop_assert!(rel_close(ll, ll_ref, 1e-9) || (ll - ll_ref).abs() < 1e-14, "{} vs {}", ll, ll_ref);
        }

        #[test]
        fn information_never_hurts_squared_error(
            masses in proptest::collection::vec(0.01f64..1.0, 3),
            centers in proptest::collection::vec(-10.0f64..10.0, 3),
            beta in 0.0f64..20.0,
            phi in -2.0f64..2.0,
        ) {
            let centers: Vec<Vec<f64>> = centers.iter().map(|c| vec![*c]).collect();
            let z: f64 = masses.iter().sum();
            let masses: Vec<f64> = masses.iter().map(|m| m / z).collect();
            let informed = expected_metric(&masses, &centers, &[phi], beta, OracleMetric::SquaredError);
            let blind = expected_metric(&masses, &centers, &[phi], 0.0, OracleMetric::SquaredError);
            prop_assert!(informed <= blind + 1e-12);
        }

        #[test]
        fn closed_form_never_exceeds_its_zero_beta_value((grid, masses, phi, beta) in arb_case()) {
            prop_assume!(masses.iter().any(|m| *m > 0.0));
            let belief = Belief::from_masses(grid, &masses).unwrap();
            let eval = QueryEvaluator::new(&belief, &FeatureDiff(phi)).unwrap();
            let blind = eval.expected_mse(Rationality::new(0.0).unwrap());
            prop_assert!(eval.expected_mse(Rationality::new(beta).unwrap()) <= blind + 1e-12 * blind.max(1.0));
        }

        #[test]
        fn argmin_survives_positive_scaling(
            values in proptest::collection::vec(0.0f64..100.0, 1..30),
            scale in 1e-3f64..1e3,
        ) {
            let pool: Vec<(Rationality, f64)> = values.iter().enumerate()
                .map(|(i, v)| (Rationality::new(i as f64 * 0.2).unwrap(), *v)).collect();
            let scaled: Vec<(Rationality, f64)> = pool.iter().map(|(b, v)| (*b, v * scale)).collect();
            let a = argmin_small_beta(&pool);
            let b = argmin_small_beta(&scaled);
            // scaling can only merge or split exact ties through rounding
            prop_assert!(a == b || (pool[a].1 - pool[b].1).abs() <= 1e-12 * pool[a].1.max(1.0));
        }
    }

    #[test]
    fn oracle_agrees_with_hand_values() {
        let centers = vec![vec![-1.0], vec![1.0]];
        let post = posterior(&[0.5, 0.5], &centers, &[1.0], 1.0, 1.0);
        assert!((post[1] - 0.731_058_578_630_004_9).abs() < 1e-15);
        assert!((entropy(&post) - 0.5822).abs() < 1e-3);
    }
}
