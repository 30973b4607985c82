//! Regular discretization of the reward-weight domain.

use alloc::vec::Vec;

use crate::error::{Result, VoiError};

/// Closed interval `[lower, upper]` sampled at `points` evenly spaced centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(lower: f64, upper: f64, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(VoiError::InvalidGrid("an axis needs at least one point"));
        }
        if !(lower.is_finite() && upper.is_finite()) || lower > upper {
            return Err(VoiError::InvalidGrid("axis bounds must be finite with lower <= upper"));
        }
        Ok(Self { lower, upper, points })
    }

    /// Distance between neighbouring centers; zero for a single-point axis.
    pub fn spacing(&self) -> f64 {
        if self.points > 1 {
            (self.upper - self.lower) / (self.points - 1) as f64
        } else {
            0.0
        }
    }

    pub fn center(&self, k: usize) -> f64 {
        match self.points {
            1 => 0.5 * (self.lower + self.upper),
            n if k + 1 == n => self.upper,
            _ => self.lower + k as f64 * self.spacing(),
        }
    }
}

/// Cartesian grid of cell centers, enumerated row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightGrid {
    axes: Vec<Axis>,
    centers: Vec<f64>,
}

impl WeightGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(VoiError::InvalidGrid("grid needs at least one dimension"));
        }
        let dims = axes.len();
        let count = axes
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.points))
            .ok_or(VoiError::InvalidGrid("cell count overflows"))?;
        let mut centers = Vec::with_capacity(count * dims);
        let mut index = alloc::vec![0usize; dims];
        for _ in 0..count {
            centers.extend(axes.iter().zip(&index).map(|(a, &k)| a.center(k)));
            for axis in (0..dims).rev() {
                index[axis] += 1;
                if index[axis] < axes[axis].points {
                    break;
                }
                index[axis] = 0;
            }
        }
        Ok(Self { axes, centers })
    }

    /// Same bounds and resolution on every axis.
    pub fn cube(dims: usize, lower: f64, upper: f64, points: usize) -> Result<Self> {
        let axis = Axis::new(lower, upper, points)?;
        Self::new(alloc::vec![axis; dims])
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn cell_count(&self) -> usize {
        self.centers.len() / self.axes.len()
    }

    pub fn center(&self, cell: usize) -> &[f64] {
        let d = self.dims();
        &self.centers[cell * d..(cell + 1) * d]
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.centers.chunks_exact(self.dims())
    }

    /// Center coordinates as one flat row-major buffer.
    pub fn flat_centers(&self) -> &[f64] {
        &self.centers
    }

    /// Index of the center nearest to `w` in Euclidean distance; ties go to the lowest index.
    pub fn nearest_cell(&self, w: &[f64]) -> Result<usize> {
        self.check_dims(w.len())?;
        let mut best = (0usize, f64::INFINITY);
        for (cell, c) in self.centers().enumerate() {
            let d2: f64 = c.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < best.1 {
                best = (cell, d2);
            }
        }
        Ok(best.0)
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.len() == self.dims()
            && self.axes.iter().zip(w).all(|(a, &x)| a.lower <= x && x <= a.upper)
    }

    pub(crate) fn check_dims(&self, actual: usize) -> Result<()> {
        if actual == self.dims() {
            Ok(())
        } else {
            Err(VoiError::DimensionMismatch { expected: self.dims(), actual })
        }
    }
}

/// A point in weight space.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn zeros(dims: usize) -> Self {
        Self(alloc::vec![0.0; dims])
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<&[f64]> for WeightVector {
    fn from(v: &[f64]) -> Self {
        Self(v.to_vec())
    }
}
