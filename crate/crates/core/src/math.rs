//! Scalar helpers for the logistic likelihood and log-space sums.

use libm::{exp, log, log1p};

/// `log(1 / (1 + exp(-x)))`, evaluated without overflow for any finite `x`.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -log1p(exp(-x))
    } else {
        x - log1p(exp(x))
    }
}

/// Logistic function `1 / (1 + exp(-x))`.
///
/// Evaluates only the tail with the non-positive exponent so that
/// `sigmoid(x) + sigmoid(-x)` is one to within a single rounding.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let e = exp(-x.abs());
    let small = e / (1.0 + e);
    if x >= 0.0 {
        1.0 - small
    } else {
        small
    }
}

/// `log(sum(exp(v)))`; `-inf` when every entry is `-inf` or the slice is empty.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|&v| exp(v - max)).sum();
    max + log(sum)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
